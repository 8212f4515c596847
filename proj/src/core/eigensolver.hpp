#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core/basis.hpp"
#include "core/model.hpp"

namespace spinbus {

inline constexpr double kDegeneracyTolerance = 1e-9;

enum class Completeness { full, lowest_k };

/// Eigenpairs of one S_z sector, energies ascending.
struct SectorSolution {
  std::shared_ptr<const SectorBasis> basis;
  Eigen::VectorXd energies;
  Eigen::MatrixXd vectors;  // one column per energy; empty when not retained
  Eigen::VectorXd residuals;

  bool has_vectors() const noexcept { return vectors.cols() == energies.size() && energies.size() > 0; }
};

struct Level {
  double energy;
  int twice_sz;
  std::size_t sector;  // index into Spectrum::sectors()
  std::size_t local;   // eigenpair index within that sector

  double sz() const noexcept { return 0.5 * twice_sz; }
};

/// Read-only view of one eigenstate.
struct StateRef {
  const SectorBasis* basis;
  std::span<const double> amplitudes;
};

/// Globally sorted, S_z-labelled spectrum assembled from sector solutions.
///
/// Levels are ordered by energy; levels whose energies agree to within
/// 1e-12 (relative) are ordered by s_z descending and then by sector, so
/// that at zero field the s_z = +1/2 member of an odd-chain doublet is
/// always level 0.
class Spectrum {
 public:
  Spectrum(int n_sites, std::vector<SectorSolution> sectors, Completeness completeness,
           std::size_t max_levels, double residual_tol);

  int n_sites() const noexcept { return n_sites_; }
  std::size_t size() const noexcept { return levels_.size(); }
  bool empty() const noexcept { return levels_.empty(); }
  const std::vector<Level>& levels() const noexcept { return levels_; }
  const Level& level(std::size_t index) const;
  double energy(std::size_t index) const { return level(index).energy; }
  const std::vector<SectorSolution>& sectors() const noexcept { return sectors_; }
  const SectorSolution* find_sector(int n_up) const noexcept;
  Completeness completeness() const noexcept { return completeness_; }
  double residual_tol() const noexcept { return residual_tol_; }

  bool has_vector(std::size_t index) const;
  /// Throws StateError when the eigenvector was not retained.
  StateRef state(std::size_t index) const;
  const SectorBasis& basis_of(std::size_t index) const;
  std::size_t sector_dimension(std::size_t index) const;

  /// E_b - E_a.
  double gap(std::size_t a, std::size_t b) const { return energy(b) - energy(a); }

 private:
  int n_sites_;
  std::vector<SectorSolution> sectors_;
  std::vector<Level> levels_;
  Completeness completeness_;
  double residual_tol_;
};

struct SolverOptions {
  bool keep_vectors = true;
  double residual_tol = 1e-10;
  std::size_t dense_cap = kDenseDimensionCap;
  /// lowest_k solves sectors up to this dimension densely.
  std::size_t dense_threshold = 600;
  std::uint64_t seed = 0x5EED;
};

/// All 2^N eigenpairs by dense diagonalization of every sector.
Spectrum full_spectrum(const SpinSystemSpec& spec, const SolverOptions& options = {});

/// The k lowest eigenpairs over the listed sectors (n_up values; all
/// sectors when empty), merged and sorted.
Spectrum lowest_k(const SpinSystemSpec& spec, std::size_t k, std::span<const int> sectors = {},
                  const SolverOptions& options = {});

/// Dense eigenpairs of one sector; used directly by code that needs a single
/// sector in full.
SectorSolution solve_sector_dense(const SpinSystemSpec& spec, int n_up, const SolverOptions& options = {});

/// Indices of the maximal prefix of levels with E - E0 <= tol.
std::vector<std::size_t> degenerate_ground_manifold(const Spectrum& spectrum,
                                                    double tol = kDegeneracyTolerance);

/// n_up of the S_z = 0 (even N) or S_z = +1/2 (odd N) sector.
int minimal_sz_sector(int n_sites) noexcept;

/// Flips the sign of v so that its largest-magnitude component is positive.
void fix_sign(Eigen::Ref<Eigen::VectorXd> v);

/// CSV with header `level,energy,sz,sector_dim`.
std::string spectrum_to_csv(const Spectrum& spectrum);

/// CSV with header `level,index,pattern,amplitude`, one row per basis state.
std::string eigenvectors_to_csv(const Spectrum& spectrum, std::size_t max_levels);

/// Binary eigenvector dump, all integers and doubles little-endian:
///   char[4] "SBEV", uint32 version (1), uint32 n_sites, uint64 level_count,
///   then per level: uint64 level, int32 n_up, uint64 dim, float64 energy,
///   dim x float64 amplitudes in increasing bit-pattern order.
std::string eigenvectors_to_binary(const Spectrum& spectrum, std::size_t max_levels);

}  // namespace spinbus
