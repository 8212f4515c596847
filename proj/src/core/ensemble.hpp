#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/model.hpp"

namespace spinbus {

enum class Boundary { open, ring };
const char* to_string(Boundary b) noexcept;
Boundary boundary_from_string(const std::string& s);

struct DisorderConfig {
  int n_sites = 5;
  double b0 = 0.0;
  double sigma_j = 0.0;
  double sigma_b = 0.0;
  std::size_t n_samples = 100;
  std::uint64_t master_seed = 0;
  Boundary boundary = Boundary::open;

  void validate() const;
};

/// Keys: n_sites, b0, sigma_J, sigma_B, n_samples, master_seed, boundary.
nlohmann::ordered_json to_json(const DisorderConfig& config);
/// Missing keys keep the values in `defaults`; unknown keys are rejected.
DisorderConfig disorder_config_from_json(const nlohmann::json& j, const DisorderConfig& defaults = {});

/// A J sample with any J_i <= 0 is redrawn whole, at most this many times.
inline constexpr int kMaxRedraws = 1000;

struct Sample {
  SpinSystemSpec spec;
  int redraws;
};

/// Sample `index`: J_i ~ Normal(1, sigma_J) drawn first, then
/// b_i ~ Normal(b0, sigma_B), from a stream seeded by child_seed(master, index).
/// N = 1 gives a single free spin.
Sample sample_spec(const DisorderConfig& config, std::size_t index);

/// Observable names accepted by run_ensemble. Sites are 1-based.
///   E0..E3, d01, d12, m<i>, m_total, K<i>_<j>_zz, K<i>_<j>_xx, j1z<i>, j1x<i>,
///   fidelity (|<0|0_clean>| against the disorder-free system), flip (1 when
///   the ground moment opposes b0, or is negative at b0 = 0), EJ0, EZ0, EJ1, EZ1.
void check_observables(const std::vector<std::string>& names, int n_sites);

struct ObservableStats {
  std::string name;
  std::vector<double> values;  // by sample index
  double mean = 0.0;
  double std = 0.0;            // N_s - 1 divisor; 0 for a single sample
};

struct EnsembleStats {
  DisorderConfig config;
  std::vector<ObservableStats> observables;
  std::size_t resample_count = 0;

  const ObservableStats& get(const std::string& name) const;
};

/// Evaluates the observables on every sample. Samples may run on up to
/// `threads` workers; results are stored and reduced in index order, so the
/// output does not depend on the thread count.
EnsembleStats run_ensemble(const DisorderConfig& config, const std::vector<std::string>& observables,
                           unsigned threads = 1);

/// CSV `sample_index,<observables...>`.
std::string ensemble_to_csv(const EnsembleStats& stats);
/// {observables: {name: {mean, std}}, resample_count, master_seed, config}.
std::string ensemble_summary_json(const EnsembleStats& stats);

/// Fraction of samples whose ground moment opposes b0 (negative at b0 = 0).
double flipped_fraction(const DisorderConfig& config, unsigned threads = 1);

struct FlipGridRow {
  double b0;
  double sigma_b;
  double fraction;
};
std::vector<FlipGridRow> flip_fraction_grid(const DisorderConfig& base, const std::vector<double>& b0s,
                                            const std::vector<double>& sigma_bs, unsigned threads = 1);
std::string flip_grid_to_csv(const std::vector<FlipGridRow>& rows);

struct HalfNormalCheck {
  double empirical;      // ensemble mean of d01
  double oracle;         // Monte-Carlo mean of |X|, X ~ Normal(0, sigma_b)
  double analytic;       // sigma_b sqrt(2/pi)
  double alt_form;       // sigma_b / sqrt(2 pi), half the true mean; recorded only
  double ratio;          // empirical / analytic
};

/// Compares the ensemble-mean zero-field gap with the half-normal mean.
HalfNormalCheck halfnormal_gap_check(const DisorderConfig& config, unsigned threads = 1);

struct GapSweepRow {
  double b0;
  double mean_gap;
  double hyperbola;  // sqrt(b0^2 + g0^2), g0 the mean gap at b0 = 0
};
std::vector<GapSweepRow> gap_vs_b0(const DisorderConfig& base, const std::vector<double>& b0s,
                                   unsigned threads = 1);

enum class SweepParameter { sigma_j, sigma_b };
SweepParameter sweep_parameter_from_string(const std::string& s);
const char* to_string(SweepParameter p) noexcept;

struct SensitivityRow {
  std::string observable;
  std::vector<double> stds;
  std::vector<double> means;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

struct SensitivityTable {
  SweepParameter parameter;
  std::vector<double> grid;
  std::vector<SensitivityRow> rows;
  std::size_t resample_count = 0;
};

/// For each observable, least-squares line of std(observable) against the
/// disorder strength over `grid` (at least four distinct points).
SensitivityTable sensitivity_sweep(const DisorderConfig& base, SweepParameter parameter,
                                   const std::vector<double>& grid, const std::vector<std::string>& observables,
                                   unsigned threads = 1);

/// CSV `observable,parameter,value,mean,std`.
std::string sensitivity_to_csv(const SensitivityTable& table);
std::string sensitivity_to_json(const SensitivityTable& table);

struct LineFit {
  double slope;
  double intercept;
  double r2;
};
/// Unweighted least squares y = slope x + intercept.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace spinbus
