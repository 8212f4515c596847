#include <doctest.h>

#include <cstring>

#include "core/errors.hpp"
#include "core/eigensolver.hpp"
#include "support.hpp"

using namespace spinbus;

TEST_SUITE("eigensolver") {

TEST_CASE("two-site singlet and triplet") {
  const auto s = full_spectrum(uniform_chain(2));
  REQUIRE(s.size() == 4);
  CHECK(s.energy(0) == doctest::Approx(-0.75));
  for (std::size_t i = 1; i < 4; ++i) CHECK(s.energy(i) == doctest::Approx(0.25));
  CHECK(s.level(0).twice_sz == 0);
  // Tie order within the triplet is s_z descending.
  CHECK(s.level(1).twice_sz == 2);
  CHECK(s.level(2).twice_sz == 0);
  CHECK(s.level(3).twice_sz == -2);
}

TEST_CASE("three-site spectrum") {
  const auto s = full_spectrum(uniform_chain(3));
  const double expected[] = {-1, -1, 0, 0, 0.5, 0.5, 0.5, 0.5};
  REQUIRE(s.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(s.energy(i) == doctest::Approx(expected[i]).epsilon(1e-12));
  CHECK(s.gap(1, 2) == doctest::Approx(1.0));
  CHECK(s.level(0).sz() == 0.5);
  CHECK(s.level(1).sz() == -0.5);
}

TEST_CASE("seven-site ground doublet") {
  const auto e = test::oracle_vector("energies_chain7");
  const auto s = full_spectrum(uniform_chain(7));
  CHECK(s.energy(0) == doctest::Approx(-2.83624).epsilon(2e-6));
  for (std::size_t i = 0; i < e.size(); ++i) CHECK(std::abs(s.energy(i) - e[i]) < 1e-10);
  CHECK(degenerate_ground_manifold(s).size() == 2);
  const auto k = lowest_k(uniform_chain(7), 2);
  CHECK(std::abs(k.energy(0) - e[0]) < 1e-10);
  CHECK(std::abs(k.energy(1) - e[1]) < 1e-10);
  CHECK(k.completeness() == Completeness::lowest_k);
}

TEST_CASE("lowest_k matches the full spectrum level by level") {
  const std::vector<double> j{1.2, 0.8, 1.0, 0.9, 1.1, 1.3, 0.7};
  const std::vector<double> b{0.1, 0.0, -0.05, 0.2, 0.0, 0.03, 0.0, 0.07};
  const auto spec = make_chain(8, j, b);
  const auto full = full_spectrum(spec);
  for (std::size_t k : {1u, 5u, 17u}) {
    const auto low = lowest_k(spec, k);
    REQUIRE(low.size() == k);
    for (std::size_t i = 0; i < k; ++i) CHECK(std::abs(low.energy(i) - full.energy(i)) < 1e-10);
  }
  SolverOptions iterative;
  iterative.dense_threshold = 0;
  const auto lz = lowest_k(spec, 6, {}, iterative);
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(lz.energy(i) - full.energy(i)) < 1e-9);
}

TEST_CASE("fifteen sites on the iterative path") {
  const auto s = lowest_k(uniform_chain(15), 4, std::vector<int>{7, 8});
  REQUIRE(s.size() == 4);
  CHECK(s.level(0).sz() == 0.5);
  CHECK(std::abs(s.energy(0) - s.energy(1)) < 1e-9);
  CHECK(s.gap(1, 2) > 0.1);
  for (const auto& sec : s.sectors()) CHECK(sec.residuals.maxCoeff() <= 1e-10);
}

TEST_CASE("ground manifold sizes") {
  CHECK(degenerate_ground_manifold(full_spectrum(uniform_chain(5))).size() == 2);
  CHECK(degenerate_ground_manifold(full_spectrum(uniform_chain(6))).size() == 1);
  CHECK(degenerate_ground_manifold(full_spectrum(uniform_chain(5, 0.05))).size() == 1);
  CHECK(minimal_sz_sector(5) == 3);
  CHECK(minimal_sz_sector(6) == 3);
}

TEST_CASE("reversing the chain leaves the spectrum unchanged") {
  const std::vector<double> j{1.3, 0.7, 1.1, 0.95, 1.05};
  const std::vector<double> b{0.1, -0.2, 0.05, 0.0, 0.3, -0.1};
  std::vector<double> jr(j.rbegin(), j.rend()), br(b.rbegin(), b.rend());
  const auto a = full_spectrum(make_chain(6, j, b));
  const auto r = full_spectrum(make_chain(6, jr, br));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.energy(i) - r.energy(i)) < 1e-12);
}

TEST_CASE("uniform field shifts each sector by -b s_z") {
  const auto a = full_spectrum(uniform_chain(6));
  const auto f = full_spectrum(uniform_chain(6, 0.3));
  for (std::size_t s = 0; s < a.sectors().size(); ++s) {
    const auto& x = a.sectors()[s];
    const auto* y = f.find_sector(x.basis->n_up());
    REQUIRE(y != nullptr);
    CHECK((y->energies.array() - (x.energies.array() - 0.3 * x.basis->sz())).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("eigenvectors are orthonormal, certified and sign-fixed") {
  const std::vector<double> j{1.1, 0.9, 1.2, 0.8, 1.0, 1.05};
  const auto s = full_spectrum(make_ring(6, j, std::vector<double>(6, 0.02)));
  for (const auto& sec : s.sectors()) {
    const auto n = sec.vectors.cols();
    CHECK((sec.vectors.transpose() * sec.vectors - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(sec.residuals.maxCoeff() <= 1e-10);
    for (Eigen::Index c = 0; c < n; ++c) {
      Eigen::Index arg;
      sec.vectors.col(c).cwiseAbs().maxCoeff(&arg);
      CHECK(sec.vectors(arg, c) > 0);
    }
  }
}

TEST_CASE("level access errors") {
  const auto s = full_spectrum(uniform_chain(3));
  CHECK_THROWS_AS(s.level(8), ParameterError);
  SolverOptions no_vectors;
  no_vectors.keep_vectors = false;
  const auto e = full_spectrum(uniform_chain(3), no_vectors);
  CHECK_FALSE(e.has_vector(0));
  CHECK_THROWS_AS(e.state(0), StateError);
  SolverOptions small;
  small.dense_cap = 10;
  CHECK_THROWS_AS(full_spectrum(uniform_chain(6), small), ResourceError);
  CHECK_THROWS_AS(lowest_k(uniform_chain(4), 0), ParameterError);
}

TEST_CASE("spectrum CSV") {
  const auto csv = spectrum_to_csv(full_spectrum(uniform_chain(2)));
  CHECK(csv == "level,energy,sz,sector_dim\n0,-0.75,0,2\n1,0.25,1,1\n2,0.25,0,2\n3,0.25,-1,1\n");
}

TEST_CASE("eigenvector CSV and binary layouts") {
  const auto s = full_spectrum(uniform_chain(2));
  const auto csv = eigenvectors_to_csv(s, 1);
  CHECK(csv.rfind("level,index,pattern,amplitude\n0,0,1,", 0) == 0);
  const auto bin = eigenvectors_to_binary(s, 2);
  REQUIRE(bin.size() == 4 + 4 + 4 + 8 + 2 * (8 + 4 + 8 + 8) + 8 * (2 + 1));
  CHECK(bin.substr(0, 4) == "SBEV");
  std::uint32_t version, n;
  std::uint64_t count;
  std::memcpy(&version, bin.data() + 4, 4);
  std::memcpy(&n, bin.data() + 8, 4);
  std::memcpy(&count, bin.data() + 12, 8);
  CHECK(version == 1);
  CHECK(n == 2);
  CHECK(count == 2);
  double energy;
  std::memcpy(&energy, bin.data() + 20 + 8 + 4 + 8, 8);
  CHECK(energy == doctest::Approx(-0.75));
}

}  // TEST_SUITE
