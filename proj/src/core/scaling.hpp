#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/ensemble.hpp"

namespace spinbus {

/// Largest system the scaling sweeps accept.
inline constexpr int kScalingMaxSites = 20;

struct ScalingRow {
  int n_sites;
  Boundary boundary;
  double e0;
  int n_bonds;
  double e0_per_bond;
  /// Delta_01 for even N, Delta_12 for odd N (first level above the ground
  /// manifold for rings).
  double gap;
  /// End-site moment in the s_z = +1/2 ground state; odd open chains only.
  std::optional<double> m_end;
};

/// Zero-field rows for every N in [n_min, n_max], sorted by N. Only the
/// minimal-|S_z| sector is solved: at b = 0 every multiplet has a member
/// there.
std::vector<ScalingRow> scaling_rows(int n_min, int n_max, Boundary boundary, unsigned threads = 1);

/// E0 / N_b per N.
std::vector<ScalingRow> energy_per_bond_sweep(int n_min, int n_max, Boundary boundary, unsigned threads = 1);

struct GapFit {
  double c;      // Delta ~ c / N, least squares through the origin
  double rms;    // root-mean-square residual
  int n_min, n_max;
};
GapFit fit_gap(const std::vector<ScalingRow>& rows, int n_min, int n_max);

struct MomentFit {
  double slope;      // d log m_N / d log N
  double intercept;  // log m_N at N = 1
  std::vector<int> n_values;
};
MomentFit fit_end_moment(const std::vector<ScalingRow>& rows, int n_min, int n_max);

/// Open-chain gap rows over [n_min, n_max] and their c/N fit.
std::pair<std::vector<ScalingRow>, GapFit> gap_sweep(int n_min, int n_max, unsigned threads = 1);

/// End moments for the listed odd N and the log-log fit. Even N is an error.
std::pair<std::vector<ScalingRow>, MomentFit> end_moment_sweep(const std::vector<int>& odd_n, unsigned threads = 1);

/// CSV `N,boundary,E0,E0_per_bond,gap,m_end`; m_end is empty where undefined.
std::string scaling_to_csv(const std::vector<ScalingRow>& rows);

}  // namespace spinbus
