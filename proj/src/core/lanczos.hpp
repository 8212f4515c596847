#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include <Eigen/Dense>

namespace spinbus {

/// y = A x for a real symmetric A.
using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

struct LanczosOptions {
  std::size_t n_eigen = 1;
  std::size_t basis_size = 0;  // 0 picks max(2k + 20, 40), clipped to the dimension
  std::size_t max_restarts = 1000;
  double tolerance = 1e-10;  // on ||A v - theta v||_2
  std::uint64_t seed = 0x5EED;
};

struct LanczosResult {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // unit columns
  Eigen::VectorXd residuals;
  std::size_t products = 0;
  std::size_t restarts = 0;
};

/// Lowest eigenpairs by thick-restart Lanczos with full reorthogonalization.
///
/// The Krylov basis is orthogonalized with two passes of classical
/// Gram-Schmidt, so the projected matrix is formed from exact projection
/// coefficients rather than the three-term recurrence. On restart the lowest
/// Ritz vectors are kept together with the residual direction. After
/// convergence the complement of the converged vectors is probed for lower
/// eigenvalues, which recovers copies of degenerate multiplets that a single
/// start vector cannot reach. Convergence is certified by explicit residuals.
/// Throws ConvergenceError when the restart budget is exhausted.
LanczosResult lanczos_lowest(const LinearMap& op, std::size_t dimension, const LanczosOptions& options);

}  // namespace spinbus
