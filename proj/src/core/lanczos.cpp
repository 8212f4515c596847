#include "core/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace spinbus {

namespace {

void apply(const LinearMap& op, const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::VectorXd& y) {
  op(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
     std::span<double>(y.data(), static_cast<std::size_t>(y.size())));
}

// Removes the components of w along the locked vectors (two passes).
void deflate(const Eigen::MatrixXd& locked, Eigen::VectorXd& w) {
  if (locked.cols() == 0) return;
  for (int pass = 0; pass < 2; ++pass) w.noalias() -= locked * (locked.transpose() * w);
}

// Orthogonalizes w against the first `count` columns of v (two passes) and
// returns the accumulated projection coefficients.
Eigen::VectorXd orthogonalize(const Eigen::MatrixXd& v, Eigen::Index count, Eigen::VectorXd& w) {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(count);
  if (count == 0) return h;
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::VectorXd c = v.leftCols(count).transpose() * w;
    w.noalias() -= v.leftCols(count) * c;
    h += c;
  }
  return h;
}

// Fresh random direction orthogonal to the locked vectors and to the first
// `count` columns of v.
Eigen::VectorXd random_direction(Random& rng, const Eigen::MatrixXd& locked, const Eigen::MatrixXd& v,
                                 Eigen::Index count) {
  const Eigen::Index n = v.rows();
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = 2.0 * rng.uniform() - 1.0;
    deflate(locked, w);
    orthogonalize(v, count, w);
    deflate(locked, w);
    const double norm = w.norm();
    if (norm > 1e-8) return w / norm;
  }
  throw ConvergenceError("could not extend the Krylov basis", std::numeric_limits<double>::infinity());
}

// Thick-restart Lanczos for the k lowest eigenpairs of A restricted to the
// orthogonal complement of `locked`. Residuals are explicit and taken in
// that complement.
LanczosResult lanczos_run(const LinearMap& op, Eigen::Index n, Eigen::Index k, const LanczosOptions& options,
                          double tolerance, Random& rng, const Eigen::MatrixXd& locked) {
  const Eigen::Index free_dim = n - locked.cols();
  Eigen::Index m = options.basis_size != 0 ? static_cast<Eigen::Index>(options.basis_size)
                                           : std::max<Eigen::Index>(2 * k + 20, 40);
  m = std::min(m, free_dim);
  if (m <= k && m < free_dim) m = std::min(free_dim, k + 1);

  auto apply_deflated = [&](const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::VectorXd& y) {
    apply(op, x, y);
    deflate(locked, y);
  };

  Eigen::MatrixXd v(n, m);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd w(n);
  Eigen::VectorXd residual_dir = Eigen::VectorXd::Zero(n);
  double beta_last = 0.0;

  LanczosResult result;
  v.col(0) = random_direction(rng, locked, v, 0);
  Eigen::Index filled = 0;
  double best_residual = std::numeric_limits<double>::infinity();

  for (std::size_t restart = 0;; ++restart) {
    for (Eigen::Index j = filled; j < m; ++j) {
      apply_deflated(v.col(j), w);
      ++result.products;
      const Eigen::VectorXd h = orthogonalize(v, j + 1, w);
      for (Eigen::Index i = 0; i <= j; ++i) {
        t(i, j) = h(i);
        t(j, i) = h(i);
      }
      const double beta = w.norm();
      const double scale = std::max(1.0, std::abs(h(j)));
      const bool breakdown = beta <= 1e-13 * scale;
      if (j + 1 < m) {
        if (breakdown) {
          // Invariant subspace: continue in a fresh direction, coupling is zero.
          v.col(j + 1) = random_direction(rng, locked, v, j + 1);
          t(j + 1, j) = t(j, j + 1) = 0.0;
        } else {
          v.col(j + 1) = w / beta;
          t(j + 1, j) = t(j, j + 1) = beta;
        }
      } else if (breakdown || m == free_dim) {
        beta_last = 0.0;
        residual_dir.setZero();
      } else {
        beta_last = beta;
        residual_dir = w / beta;
      }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(t);
    const Eigen::VectorXd& theta = ritz.eigenvalues();
    const Eigen::MatrixXd& s = ritz.eigenvectors();
    const Eigen::VectorXd estimates = (beta_last * s.row(m - 1).head(k)).cwiseAbs();
    const bool estimated = (estimates.array() <= tolerance).all();
    const bool out_of_budget = restart >= options.max_restarts;

    if (estimated || out_of_budget) {
      Eigen::MatrixXd x = v * s.leftCols(k);
      Eigen::VectorXd res(k);
      Eigen::VectorXd ax(n);
      for (Eigen::Index i = 0; i < k; ++i) {
        x.col(i).normalize();
        apply_deflated(x.col(i), ax);
        ++result.products;
        res(i) = (ax - theta(i) * x.col(i)).norm();
      }
      best_residual = std::min(best_residual, res.maxCoeff());
      if ((res.array() <= tolerance).all()) {
        result.values = theta.head(k);
        result.vectors = std::move(x);
        result.residuals = std::move(res);
        result.restarts = restart;
        return result;
      }
      if (out_of_budget) {
        throw ConvergenceError("Lanczos did not converge in " + std::to_string(options.max_restarts) +
                                   " restarts (best residual " + std::to_string(best_residual) + ")",
                               best_residual);
      }
    }
    if (m == free_dim) {
      // Full-dimensional basis already; nothing left to restart with.
      throw ConvergenceError("Lanczos lost accuracy on a full Krylov basis", best_residual);
    }

    // Thick restart: keep the lowest Ritz vectors plus the residual direction.
    const Eigen::Index keep = std::min<Eigen::Index>(m - 1, k + (m - k) / 2);
    const Eigen::MatrixXd kept = v * s.leftCols(keep);
    v.leftCols(keep) = kept;
    t.setZero();
    for (Eigen::Index i = 0; i < keep; ++i) t(i, i) = theta(i);
    if (beta_last == 0.0) {
      v.col(keep) = random_direction(rng, locked, v, keep);
    } else {
      Eigen::VectorXd f = residual_dir;
      orthogonalize(v, keep, f);
      v.col(keep) = f.normalized();
    }
    filled = keep;
  }
}

}  // namespace

LanczosResult lanczos_lowest(const LinearMap& op, std::size_t dimension, const LanczosOptions& options) {
  if (dimension == 0) throw ParameterError("empty operator");
  if (options.n_eigen == 0 || options.n_eigen > dimension) {
    throw ParameterError("requested " + std::to_string(options.n_eigen) + " eigenpairs of a " +
                         std::to_string(dimension) + "-dimensional operator");
  }
  const auto n = static_cast<Eigen::Index>(dimension);
  const auto k = static_cast<Eigen::Index>(options.n_eigen);
  // Internal runs aim below the requested tolerance so that residuals stay
  // within it after the deflation probes below.
  const double inner_tol = options.tolerance / 10;
  Random rng(options.seed);
  LanczosResult result = lanczos_run(op, n, k, options, inner_tol, rng, Eigen::MatrixXd(n, 0));

  // A single start vector spans one direction of each degenerate eigenspace,
  // so copies of a multiplet can be missed. Probe the complement of the
  // converged vectors for anything lower than the current k-th value.
  for (Eigen::Index probe = 0; probe < k && n - k > 0; ++probe) {
    const LanczosResult p = lanczos_run(op, n, 1, options, inner_tol, rng, result.vectors);
    result.products += p.products;
    const double top = result.values(k - 1);
    if (!(p.values(0) < top - 1e-10 * std::max(1.0, std::abs(top)))) break;
    // Replace the highest pair and re-sort.
    result.values(k - 1) = p.values(0);
    result.vectors.col(k - 1) = p.vectors.col(0);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < k; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return result.values(a) < result.values(b); });
    Eigen::VectorXd values(k);
    Eigen::MatrixXd vectors(n, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      values(i) = result.values(order[static_cast<std::size_t>(i)]);
      vectors.col(i) = result.vectors.col(order[static_cast<std::size_t>(i)]);
    }
    result.values = std::move(values);
    result.vectors = std::move(vectors);
  }

  // Certify against the undeflated operator.
  Eigen::VectorXd ax(n);
  for (Eigen::Index i = 0; i < k; ++i) {
    apply(op, result.vectors.col(i), ax);
    ++result.products;
    result.residuals(i) = (ax - result.values(i) * result.vectors.col(i)).norm();
  }
  const double worst = result.residuals.maxCoeff();
  if (worst > options.tolerance) {
    throw ConvergenceError("Lanczos residual " + std::to_string(worst) + " above tolerance", worst);
  }
  return result;
}

}  // namespace spinbus
