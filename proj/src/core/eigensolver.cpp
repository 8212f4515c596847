#include "core/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "core/errors.hpp"
#include "core/format.hpp"
#include "core/lanczos.hpp"
#include "core/rng.hpp"

namespace spinbus {

namespace {

bool energies_tie(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace

Spectrum::Spectrum(int n_sites, std::vector<SectorSolution> sectors, Completeness completeness,
                   std::size_t max_levels, double residual_tol)
    : n_sites_(n_sites), sectors_(std::move(sectors)), completeness_(completeness), residual_tol_(residual_tol) {
  for (std::size_t s = 0; s < sectors_.size(); ++s) {
    const auto& sol = sectors_[s];
    for (Eigen::Index i = 0; i < sol.energies.size(); ++i) {
      levels_.push_back({sol.energies(i), sol.basis->twice_sz(), s, static_cast<std::size_t>(i)});
    }
  }
  auto tie_order = [](const Level& a, const Level& b) {
    if (a.twice_sz != b.twice_sz) return a.twice_sz > b.twice_sz;
    if (a.sector != b.sector) return a.sector < b.sector;
    return a.local < b.local;
  };
  std::sort(levels_.begin(), levels_.end(), [&](const Level& a, const Level& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return tie_order(a, b);
  });
  // Re-order clusters of numerically equal energies by (s_z desc, sector).
  for (std::size_t start = 0; start < levels_.size();) {
    std::size_t end = start + 1;
    while (end < levels_.size() && energies_tie(levels_[start].energy, levels_[end].energy)) ++end;
    if (end - start > 1) {
      std::stable_sort(levels_.begin() + static_cast<std::ptrdiff_t>(start),
                       levels_.begin() + static_cast<std::ptrdiff_t>(end), tie_order);
    }
    start = end;
  }
  if (levels_.size() > max_levels) levels_.resize(max_levels);
}

const Level& Spectrum::level(std::size_t index) const {
  if (index >= levels_.size()) {
    throw ParameterError("level " + std::to_string(index) + " not in spectrum of " +
                         std::to_string(levels_.size()) + " levels");
  }
  return levels_[index];
}

const SectorSolution* Spectrum::find_sector(int n_up) const noexcept {
  for (const auto& s : sectors_) {
    if (s.basis->n_up() == n_up) return &s;
  }
  return nullptr;
}

bool Spectrum::has_vector(std::size_t index) const {
  return sectors_[level(index).sector].has_vectors();
}

StateRef Spectrum::state(std::size_t index) const {
  const Level& l = level(index);
  const auto& sol = sectors_[l.sector];
  if (!sol.has_vectors()) {
    throw StateError("eigenvector of level " + std::to_string(index) + " was not retained");
  }
  const auto dim = static_cast<std::size_t>(sol.vectors.rows());
  return {sol.basis.get(),
          std::span<const double>(sol.vectors.data() + static_cast<std::size_t>(l.local) * dim, dim)};
}

const SectorBasis& Spectrum::basis_of(std::size_t index) const { return *sectors_[level(index).sector].basis; }

std::size_t Spectrum::sector_dimension(std::size_t index) const { return basis_of(index).size(); }

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  if (v.size() == 0) return;
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0) v = -v;
}

SectorSolution solve_sector_dense(const SpinSystemSpec& spec, int n_up, const SolverOptions& options) {
  auto basis = std::make_shared<const SectorBasis>(spec.n_sites(), n_up);
  const Eigen::MatrixXd h = build_sector_matrix(spec, *basis, options.dense_cap);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      h, options.keep_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", 0.0);
  SectorSolution sol;
  sol.basis = std::move(basis);
  sol.energies = es.eigenvalues();
  if (options.keep_vectors) {
    sol.vectors = es.eigenvectors();
    sol.residuals.resize(sol.energies.size());
    for (Eigen::Index i = 0; i < sol.vectors.cols(); ++i) {
      fix_sign(sol.vectors.col(i));
      sol.residuals(i) = (h * sol.vectors.col(i) - sol.energies(i) * sol.vectors.col(i)).norm();
    }
  }
  return sol;
}

Spectrum full_spectrum(const SpinSystemSpec& spec, const SolverOptions& options) {
  const int n = spec.n_sites();
  for (int up = 0; up <= n; ++up) {
    if (binomial(n, up) > options.dense_cap) {
      throw ResourceError("sector n_up=" + std::to_string(up) + " of dimension " +
                          std::to_string(binomial(n, up)) + " exceeds the dense cap " +
                          std::to_string(options.dense_cap));
    }
  }
  std::vector<SectorSolution> sectors;
  sectors.reserve(static_cast<std::size_t>(n + 1));
  for (int up = n; up >= 0; --up) sectors.push_back(solve_sector_dense(spec, up, options));
  const std::size_t total = std::size_t{1} << n;
  return Spectrum(n, std::move(sectors), Completeness::full, total, options.residual_tol);
}

Spectrum lowest_k(const SpinSystemSpec& spec, std::size_t k, std::span<const int> sectors,
                  const SolverOptions& options) {
  if (k == 0) throw ParameterError("k must be at least 1");
  const int n = spec.n_sites();
  std::vector<int> ups(sectors.begin(), sectors.end());
  if (ups.empty()) {
    for (int up = n; up >= 0; --up) ups.push_back(up);
  }
  std::sort(ups.begin(), ups.end(), std::greater<>());
  ups.erase(std::unique(ups.begin(), ups.end()), ups.end());

  std::vector<SectorSolution> solved;
  std::size_t available = 0;
  for (int up : ups) {
    if (up < 0 || up > n) throw ParameterError("sector n_up=" + std::to_string(up) + " out of range");
    const std::size_t dim = binomial(n, up);
    const std::size_t want = std::min(k, dim);
    available += dim;
    if (dim <= options.dense_threshold) {
      auto sol = solve_sector_dense(spec, up, options);
      sol.energies.conservativeResize(static_cast<Eigen::Index>(want));
      if (sol.has_vectors() || sol.vectors.size() > 0) {
        sol.vectors.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(want));
        sol.residuals.conservativeResize(static_cast<Eigen::Index>(want));
      }
      solved.push_back(std::move(sol));
      continue;
    }
    auto basis = std::make_shared<const SectorBasis>(n, up);
    const SectorOperator op(spec, *basis);
    LanczosOptions lo;
    lo.n_eigen = want;
    lo.tolerance = options.residual_tol;
    lo.seed = child_seed(options.seed, static_cast<std::uint64_t>(up));
    auto res = lanczos_lowest([&op](std::span<const double> x, std::span<double> y) { op.apply(x, y); },
                              dim, lo);
    SectorSolution sol;
    sol.basis = std::move(basis);
    sol.energies = std::move(res.values);
    sol.residuals = std::move(res.residuals);
    if (options.keep_vectors) {
      sol.vectors = std::move(res.vectors);
      for (Eigen::Index i = 0; i < sol.vectors.cols(); ++i) fix_sign(sol.vectors.col(i));
    }
    solved.push_back(std::move(sol));
  }
  return Spectrum(n, std::move(solved), Completeness::lowest_k, std::min(k, available), options.residual_tol);
}

std::vector<std::size_t> degenerate_ground_manifold(const Spectrum& spectrum, double tol) {
  if (spectrum.empty()) throw ParameterError("empty spectrum");
  std::vector<std::size_t> out;
  const double e0 = spectrum.energy(0);
  for (std::size_t i = 0; i < spectrum.size() && spectrum.energy(i) - e0 <= tol; ++i) out.push_back(i);
  return out;
}

int minimal_sz_sector(int n_sites) noexcept { return (n_sites + 1) / 2; }

std::string spectrum_to_csv(const Spectrum& spectrum) {
  CsvWriter csv({"level", "energy", "sz", "sector_dim"});
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const auto& l = spectrum.level(i);
    csv.row({std::to_string(i), format_number(l.energy), format_number(l.sz()),
             std::to_string(spectrum.sector_dimension(i))});
  }
  return csv.str();
}

std::string eigenvectors_to_csv(const Spectrum& spectrum, std::size_t max_levels) {
  CsvWriter csv({"level", "index", "pattern", "amplitude"});
  const std::size_t count = std::min(max_levels, spectrum.size());
  for (std::size_t i = 0; i < count; ++i) {
    const auto st = spectrum.state(i);
    for (std::size_t r = 0; r < st.amplitudes.size(); ++r) {
      csv.row({std::to_string(i), std::to_string(r), std::to_string(st.basis->state(r)),
               format_number(st.amplitudes[r])});
    }
  }
  return csv.str();
}

namespace {

template <typename T>
void put_le(std::string& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

}  // namespace

std::string eigenvectors_to_binary(const Spectrum& spectrum, std::size_t max_levels) {
  const std::size_t count = std::min(max_levels, spectrum.size());
  std::string out = "SBEV";
  put_le<std::uint32_t>(out, 1);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(spectrum.n_sites()));
  put_le<std::uint64_t>(out, count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto st = spectrum.state(i);
    put_le<std::uint64_t>(out, i);
    put_le<std::int32_t>(out, st.basis->n_up());
    put_le<std::uint64_t>(out, st.amplitudes.size());
    put_le<double>(out, spectrum.energy(i));
    for (double a : st.amplitudes) put_le<double>(out, a);
  }
  return out;
}

}  // namespace spinbus
