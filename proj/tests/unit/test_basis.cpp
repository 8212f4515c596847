#include <doctest.h>

#include <algorithm>
#include <complex>

#include "core/basis.hpp"
#include "core/errors.hpp"

using namespace spinbus;

TEST_SUITE("basis") {

TEST_CASE("four sites with two up spins") {
  const SectorBasis b(4, 2);
  const std::vector<BitState> expected{0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100};
  REQUIRE(b.size() == expected.size());
  for (std::size_t r = 0; r < expected.size(); ++r) {
    CHECK(b.state(r) == expected[r]);
    CHECK(b.rank(expected[r]) == r);
  }
  CHECK(b.twice_sz() == 0);
}

TEST_CASE("fully polarized sector has one state") {
  const SectorBasis b(3, 3);
  REQUIRE(b.size() == 1);
  CHECK(b.state(0) == 0b111);
  CHECK(b.sz() == 1.5);
  CHECK(SectorBasis(3, 0).state(0) == 0);
}

TEST_CASE("rank inverts enumeration for a large sector") {
  const SectorBasis b(14, 7);
  REQUIRE(b.size() == 3432);
  CHECK(std::is_sorted(b.states().begin(), b.states().end()));
  for (std::size_t r = 0; r < b.size(); ++r) REQUIRE(b.rank(b.state(r)) == r);
}

TEST_CASE("find rejects patterns outside the sector") {
  const SectorBasis b(5, 2);
  CHECK(b.find(0b00011).value() == 0);
  CHECK_FALSE(b.find(0b00111).has_value());
  CHECK_FALSE(b.find(0b100001).has_value());
}

TEST_CASE("sector dimensions add up to 2^N") {
  for (int n = 1; n <= 16; ++n) {
    std::uint64_t total = 0;
    for (int up = 0; up <= n; ++up) {
      const SectorBasis b(n, up);
      CHECK(b.size() == binomial(n, up));
      total += b.size();
    }
    CHECK(total == (std::uint64_t{1} << n));
  }
}

TEST_CASE("invalid sectors are rejected") {
  CHECK_THROWS_AS(SectorBasis(0, 0), ParameterError);
  CHECK_THROWS_AS(SectorBasis(25, 1), ParameterError);
  CHECK_THROWS_AS(SectorBasis(4, 5), ParameterError);
  CHECK_THROWS_AS(build_sector(4, -1), ParameterError);
}

TEST_CASE("exchange bond on aligned spins is diagonal") {
  const SectorBasis b(2, 2);
  const auto out = apply_exchange_bond(b, 0, 1, 0);
  REQUIRE(out.size() == 1);
  CHECK(out[0].target == 0);
  CHECK(out[0].amplitude == doctest::Approx(0.25));
}

TEST_CASE("exchange bond on anti-aligned spins flips them") {
  // |up,down> with site 0 up is the pattern 0b01.
  const SectorBasis b(2, 1);
  const auto out = apply_exchange_bond(b, 0, 1, b.rank(0b01));
  REQUIRE(out.size() == 2);
  CHECK(out[0].target == b.rank(0b01));
  CHECK(out[0].amplitude == doctest::Approx(-0.25));
  CHECK(out[1].target == b.rank(0b10));
  CHECK(out[1].amplitude == doctest::Approx(0.5));
}

TEST_CASE("bond (1,2) on up-down-up") {
  const SectorBasis b(3, 2);
  const auto out = apply_exchange_bond(b, 1, 2, b.rank(0b101));
  REQUIRE(out.size() == 2);
  CHECK(out[0].amplitude == doctest::Approx(-0.25));
  CHECK(b.state(out[1].target) == 0b011);
  CHECK(out[1].amplitude == doctest::Approx(0.5));
}

TEST_CASE("exchange bond validates its sites") {
  const SectorBasis b(3, 1);
  CHECK_THROWS_AS(apply_exchange_bond(b, 0, 3, 0), ParameterError);
  CHECK_THROWS_AS(apply_exchange_bond(b, 1, 1, 0), ParameterError);
  CHECK_THROWS_AS(apply_exchange_bond(b, -1, 1, 0), ParameterError);
}

TEST_CASE("sigma_z reads the site") {
  const SectorBasis b(3, 2);
  const auto out = apply_sigma(b, b, 1, PauliAxis::z, b.rank(0b101));
  REQUIRE(out.size() == 1);
  CHECK(out[0].amplitude == -1.0);
  CHECK(pauli_z(0b101, 0) == 1.0);
  CHECK(spin_z(0b101, 1) == -0.5);
}

TEST_CASE("sigma_x lowers into the neighbouring sector") {
  const SectorBasis from(2, 1), to(2, 0);
  const auto out = apply_sigma(from, to, 0, PauliAxis::x, from.rank(0b01));
  REQUIRE(out.size() == 1);
  CHECK(to.state(out[0].target) == 0b00);
  CHECK(out[0].amplitude == 1.0);
  CHECK_FALSE(out[0].imaginary);
  // Site 1 is already down; nothing lands in n_up = 0.
  CHECK(apply_sigma(from, to, 1, PauliAxis::x, from.rank(0b10)).size() == 1);
  CHECK(apply_sigma(from, to, 1, PauliAxis::x, from.rank(0b01)).empty());
}

TEST_CASE("sigma_y carries a factor of i") {
  const SectorBasis down(1, 0), up(1, 1);
  // sigma_y |up> = i |down>, sigma_y |down> = -i |up>.
  const auto raise = apply_sigma(down, up, 0, PauliAxis::y, 0);
  REQUIRE(raise.size() == 1);
  CHECK(raise[0].imaginary);
  CHECK(raise[0].amplitude == -1.0);
  const auto lower = apply_sigma(up, down, 0, PauliAxis::y, 0);
  REQUIRE(lower.size() == 1);
  CHECK(lower[0].amplitude == 1.0);
}

TEST_CASE("sigma_x and sigma_y reject a target sector that is not adjacent") {
  const SectorBasis from(3, 1), far(3, 3);
  CHECK_THROWS_AS(apply_sigma(from, far, 0, PauliAxis::x, 0), ParameterError);
  CHECK_THROWS_AS(apply_sigma(from, from, 3, PauliAxis::z, 0), ParameterError);
}

TEST_CASE("sigma_x squares to one") {
  const SectorBasis a(4, 2), b(4, 3), c(4, 1);
  for (std::size_t r = 0; r < a.size(); ++r) {
    for (int site = 0; site < 4; ++site) {
      const SectorBasis& mid = (a.state(r) >> site) & 1U ? c : b;
      const auto once = apply_sigma(a, mid, site, PauliAxis::x, r);
      REQUIRE(once.size() == 1);
      const auto twice = apply_sigma(mid, a, site, PauliAxis::x, once[0].target);
      REQUIRE(twice.size() == 1);
      CHECK(twice[0].target == r);
    }
  }
}

}  // TEST_SUITE
