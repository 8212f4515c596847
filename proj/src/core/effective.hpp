#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/basis.hpp"
#include "core/eigensolver.hpp"
#include "core/model.hpp"

namespace spinbus {

/// m_i = <k|sigma_iz|k> for every site.
std::vector<double> local_moments(const Spectrum& spectrum, std::size_t level = 0);

/// <k|sigma_iz sigma_jz|k>.
double zz_correlation(const Spectrum& spectrum, std::size_t level, int i, int j);

struct J1Components {
  std::vector<double> z;
  std::vector<double> x;
  /// False when levels 0 and 1 do not lie in sectors differing by one up
  /// spin; x is then all zeros.
  bool x_defined = false;
};

/// z_i = (<0|sigma_iz|0> - <1|sigma_iz|1>)/2 and x_i = <0|sigma_ix|1>.
/// The relative phase of |0> and |1> is fixed so that sum_i x_i >= 0.
J1Components j1_components(const Spectrum& spectrum);

/// Second-order correction c_i to the qubit-bus coupling of an odd bus,
/// J1 = J m_i + J^2 c_i, evaluated in level 0 with the ground manifold
/// (or the two lowest levels) excluded. Requires a full spectrum.
double j1_second_order(const Spectrum& spectrum, int site);

struct J2Result {
  double k = 0.0;
  std::size_t excluded = 0;
  bool warning = false;
  std::string note;
};

/// K_ij = (1/2) sum'_n <0|sigma_i|n><n|sigma_j|0> / (E0 - En), axis x or z,
/// with the ground manifold excluded. Requires a full spectrum. |0> is level
/// `ground`, which must lie in the ground manifold (either doublet member of
/// an odd bus at zero field gives the same K).
J2Result j2_exact(const Spectrum& spectrum, int i, int j, PauliAxis axis, std::size_t ground = 0);

/// Closure estimates; odd and even buses respectively.
double j2_approx_odd(const Spectrum& spectrum, int i, int j);
double j2_approx_even(const Spectrum& spectrum, int i, int j);

struct GapDecomposition {
  double ej0, ez0, ej1, ez1;
  /// |dE_J / dE_Z|; infinite when dE_Z vanishes and dE_J does not.
  double ratio;
};

GapDecomposition gap_decomposition(const SpinSystemSpec& spec, const Spectrum& spectrum);

/// |<a|b>|; zero for states in different sectors.
double fidelity(const StateRef& a, const StateRef& b);

enum class FlipState { parallel, flipped, undefined };
const char* to_string(FlipState f) noexcept;

/// Sign of the ground-state total moment against sign(b0).
FlipState detect_flip(const Spectrum& spectrum, double b0);

struct EffectiveReport {
  std::vector<double> m;
  double m_total = 0.0;
  J1Components j1;
  std::optional<int> pair_i, pair_j;  // 0-based
  std::optional<J2Result> j2_zz, j2_xx;
  double d01 = 0.0;
  std::optional<double> d12;
  GapDecomposition decomposition{};
  std::vector<std::string> warnings;
};

/// Everything the effective command reports. The pair is 0-based; K is
/// only computed when a pair is given.
EffectiveReport effective_report(const SpinSystemSpec& spec, const Spectrum& spectrum,
                                 std::optional<std::pair<int, int>> pair);

std::string effective_report_json(const EffectiveReport& report);

struct ValidationPoint {
  std::vector<double> couplings;  // per attachment
  std::vector<double> full_splittings;
  std::vector<double> effective_splittings;
  std::vector<double> bare_splittings;  // first-order J1 only
  double discrepancy = 0.0;
  double bare_discrepancy = 0.0;
};

struct ValidationReport {
  int n_bus = 0;
  bool odd = false;
  std::vector<QubitAttachment> attachments;
  std::vector<double> m;         // at the attachment sites
  std::vector<double> c;         // second-order corrections (odd bus)
  double k = 0.0;                // K between the two attachment sites
  std::vector<ValidationPoint> points;
  /// discrepancy(point p) / discrepancy(point p+1)
  std::vector<double> shrink_ratios;
  std::vector<std::string> warnings;
};

/// Compares the low-lying splittings of the bus-plus-qubits system against
/// the effective model (three-spin for an odd bus, two-spin for an even
/// one) at each scale in `scales`, which multiplies the attachment
/// couplings. The bus must be at zero field.
ValidationReport validate_effective(const SpinSystemSpec& bus, std::span<const QubitAttachment> attachments,
                                    std::span<const double> scales = {});

std::string validation_report_json(const ValidationReport& report);

}  // namespace spinbus
