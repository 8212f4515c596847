#include <doctest.h>

#include <random>

#include "core/effective.hpp"
#include "core/eigensolver.hpp"
#include "support.hpp"

using namespace spinbus;

namespace {

// Chains, rings and random graphs with random couplings (including a few
// ferromagnetic bonds) and random fields.
SpinSystemSpec random_spec(std::mt19937_64& rng, int index) {
  std::uniform_int_distribution<int> size(2, 8);
  std::uniform_real_distribution<double> coupling(0.1, 2.0), field(-0.5, 0.5), unit(0.0, 1.0);
  const int n = size(rng);
  std::vector<Bond> bonds;
  auto add = [&](int i, int j) {
    for (const auto& b : bonds)
      if ((b.i == i && b.j == j) || (b.i == j && b.j == i)) return;
    const double sign = unit(rng) < 0.1 ? -1.0 : 1.0;
    bonds.push_back({i, j, sign * coupling(rng)});
  };
  for (int i = 0; i + 1 < n; ++i) add(i, i + 1);
  const int shape = index % 3;
  if (shape == 1 && n >= 3) add(n - 1, 0);
  if (shape == 2) {
    std::uniform_int_distribution<int> site(0, n - 1);
    for (int e = 0; e < n; ++e) {
      const int i = site(rng), j = site(rng);
      if (i != j) add(i, j);
    }
  }
  std::vector<double> fields(static_cast<std::size_t>(n));
  const bool zero_field = index % 4 == 0;
  for (auto& f : fields) f = zero_field ? 0.0 : field(rng);
  return SpinSystemSpec(n, std::move(bonds), std::move(fields), "property " + std::to_string(index));
}

}  // namespace

TEST_SUITE("properties") {

TEST_CASE("structural invariants over random systems") {
  std::mt19937_64 rng(20240611);
  constexpr int kSpecs = 120;
  for (int index = 0; index < kSpecs; ++index) {
    const auto spec = random_spec(rng, index);
    CAPTURE(spec_to_json(spec));
    const int n = spec.n_sites();
    const Eigen::MatrixXd full = test::kron_hamiltonian(spec);

    // Block diagonal in n_up with exact zeros between sectors.
    for (Eigen::Index r = 0; r < full.rows(); ++r)
      for (Eigen::Index c = 0; c < full.cols(); ++c)
        if (__builtin_popcount(static_cast<unsigned>(r)) != __builtin_popcount(static_cast<unsigned>(c)))
          REQUIRE(full(r, c) == 0.0);
    CHECK(std::abs(full.trace()) < 1e-12);

    double trace = 0.0;
    for (int up = 0; up <= n; ++up) {
      const SectorBasis basis(n, up);
      const auto h = build_sector_matrix(spec, basis);
      trace += h.trace();
      for (std::size_t r = 0; r < basis.size(); ++r)
        for (std::size_t c = 0; c < basis.size(); ++c)
          REQUIRE(std::abs(h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) -
                           full(basis.state(r), basis.state(c))) < 1e-14);
    }
    CHECK(std::abs(trace) < 1e-12);

    const auto s = full_spectrum(spec);
    const Eigen::VectorXd ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(full).eigenvalues();
    REQUIRE(s.size() == static_cast<std::size_t>(ref.size()));
    for (std::size_t k = 0; k < s.size(); ++k) {
      REQUIRE(std::abs(s.energy(k) - ref(static_cast<Eigen::Index>(k))) < 1e-10);
      const auto st = s.state(k);
      const Eigen::Map<const Eigen::VectorXd> v(st.amplitudes.data(), static_cast<Eigen::Index>(st.amplitudes.size()));
      const Eigen::VectorXd hv = apply_hamiltonian(spec, st.basis->n_up(), Eigen::VectorXd(v));
      REQUIRE((hv - s.energy(k) * v).norm() <= 1e-10);
      const auto m = local_moments(s, k);
      double total = 0.0;
      for (double x : m) {
        REQUIRE(std::abs(x) <= 1.0 + 1e-12);
        total += x;
      }
      REQUIRE(std::abs(total - 2.0 * s.level(k).sz()) < 1e-10);
      const double ej = exchange_energy(spec, *st.basis, st.amplitudes);
      const double ez = zeeman_energy(spec, *st.basis, st.amplitudes);
      REQUIRE(std::abs(ej + ez - s.energy(k)) < 1e-10);
    }
    for (const auto& sec : s.sectors()) REQUIRE(sec.residuals.maxCoeff() <= 1e-10);
  }
}

TEST_CASE("iterative solver agrees with the oracle on random systems") {
  std::mt19937_64 rng(77);
  SolverOptions iterative;
  iterative.dense_threshold = 0;
  for (int index = 0; index < 20; ++index) {
    const auto spec = random_spec(rng, index);
    const Eigen::VectorXd ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(test::kron_hamiltonian(spec)).eigenvalues();
    const std::size_t k = std::min<std::size_t>(4, static_cast<std::size_t>(ref.size()));
    const auto s = lowest_k(spec, k, {}, iterative);
    for (std::size_t i = 0; i < k; ++i) CHECK(std::abs(s.energy(i) - ref(static_cast<Eigen::Index>(i))) < 1e-9);
  }
}

}  // TEST_SUITE
