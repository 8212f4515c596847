#include <doctest.h>

#include "core/errors.hpp"
#include "core/scaling.hpp"

using namespace spinbus;

TEST_SUITE("scaling") {

TEST_CASE("smallest chains") {
  const auto rows = energy_per_bond_sweep(2, 3, Boundary::open);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].e0_per_bond == doctest::Approx(-0.75));
  CHECK(rows[0].gap == doctest::Approx(1.0));
  CHECK(rows[1].e0_per_bond == doctest::Approx(-0.5));
  CHECK(rows[1].n_bonds == 2);
  CHECK(rows[1].gap == doctest::Approx(1.0));
  CHECK(rows[1].m_end.value() == doctest::Approx(2.0 / 3));
  CHECK_FALSE(rows[0].m_end.has_value());
}

TEST_CASE("energy per bond approaches the Bethe value") {
  const double bethe = 0.25 - std::log(2.0);
  const auto rows = energy_per_bond_sweep(12, 14, Boundary::open, 2);
  for (const auto& r : rows) CHECK(std::abs(r.e0_per_bond - bethe) < 0.025);
  CHECK(std::abs(rows[2].e0_per_bond - bethe) < std::abs(rows[0].e0_per_bond - bethe));
}

TEST_CASE("parity oscillation and positive gaps") {
  const auto rows = energy_per_bond_sweep(2, 10, Boundary::open);
  for (const auto& r : rows) CHECK(r.gap > 0);
  for (std::size_t i = 0; i + 2 < rows.size(); ++i) {
    const double a = rows[i + 1].e0_per_bond - rows[i].e0_per_bond;
    const double b = rows[i + 2].e0_per_bond - rows[i + 1].e0_per_bond;
    CHECK(a * b < 0);
  }
}

TEST_CASE("rings") {
  const auto rings = energy_per_bond_sweep(4, 10, Boundary::ring);
  const auto chains = energy_per_bond_sweep(4, 10, Boundary::open);
  for (std::size_t i = 0; i < rings.size(); i += 2) {
    CHECK(rings[i].n_bonds == rings[i].n_sites);
    // The extra bond lowers the total energy but costs energy per bond.
    CHECK(rings[i].e0 < chains[i].e0);
    CHECK(rings[i].e0_per_bond > chains[i].e0_per_bond);
  }
  for (const auto& r : rings) CHECK(r.gap > 0);
  CHECK(rings[0].e0 == doctest::Approx(-2.0));
  CHECK_THROWS_AS(energy_per_bond_sweep(2, 5, Boundary::ring), ParameterError);
}

TEST_CASE("gap fit through the origin") {
  const auto [rows, fit] = gap_sweep(4, 10);
  CHECK(rows.size() == 7);
  CHECK(fit.c > 2.0);
  CHECK(fit.n_min == 4);
  double num = 0, den = 0;
  for (const auto& r : rows) {
    num += r.gap / r.n_sites;
    den += 1.0 / (r.n_sites * r.n_sites);
  }
  CHECK(fit.c == doctest::Approx(num / den));
}

TEST_CASE("end moments") {
  const auto [rows, fit] = end_moment_sweep({3, 5, 7, 9, 11, 13});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(*rows[i].m_end > 0);
    if (i > 0) CHECK(*rows[i].m_end < *rows[i - 1].m_end);
  }
  CHECK(*rows[0].m_end == doctest::Approx(2.0 / 3));
  CHECK(fit.slope < 0);
  CHECK_THROWS_AS(end_moment_sweep({5, 6}), ParameterError);
}

TEST_CASE("size limits") {
  CHECK_THROWS_AS(energy_per_bond_sweep(2, 25, Boundary::open), ParameterError);
  CHECK_THROWS_AS(energy_per_bond_sweep(1, 4, Boundary::open), ParameterError);
  CHECK_THROWS_AS(energy_per_bond_sweep(6, 4, Boundary::open), ParameterError);
}

TEST_CASE("scaling CSV") {
  const auto csv = scaling_to_csv(energy_per_bond_sweep(2, 3, Boundary::open));
  CHECK(csv == "N,boundary,E0,E0_per_bond,gap,m_end\n2,open,-0.75,-0.75,1,\n3,open,-1,-0.5,1,0.666666666666667\n");
}

}  // TEST_SUITE
