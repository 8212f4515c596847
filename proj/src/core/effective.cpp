#include "core/effective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/format.hpp"

namespace spinbus {

namespace {

using ordered_json = nlohmann::ordered_json;

void check_site(const Spectrum& spectrum, int site) {
  if (site < 0 || site >= spectrum.n_sites()) {
    throw ParameterError("site " + std::to_string(site) + " outside a " +
                         std::to_string(spectrum.n_sites()) + "-site system");
  }
}

void require_full(const Spectrum& spectrum, const char* what) {
  if (spectrum.completeness() != Completeness::full) {
    throw StateError(std::string(what) + " needs a full spectrum");
  }
}

// Component of sigma_x|v> (or s^+|v>, s^-|v>) that lands in sector `to`.
// With `raise_only`/`lower_only` only the matching spin flips contribute.
enum class Flip { both, raise, lower };

Eigen::VectorXd flip_image(const StateRef& v, int site, const SectorBasis& to, Flip which) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(to.size()));
  const BitState bit = BitState{1} << site;
  for (std::size_t r = 0; r < v.amplitudes.size(); ++r) {
    const BitState s = v.basis->state(r);
    const bool up = s & bit;
    if ((which == Flip::raise && up) || (which == Flip::lower && !up)) continue;
    const BitState t = s ^ bit;
    if (__builtin_popcount(t) != to.n_up()) continue;
    out(static_cast<Eigen::Index>(to.rank(t))) += v.amplitudes[r];
  }
  return out;
}

Eigen::VectorXd z_image(const StateRef& v, int site) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.amplitudes.size()));
  for (std::size_t r = 0; r < v.amplitudes.size(); ++r) {
    out(static_cast<Eigen::Index>(r)) = pauli_z(v.basis->state(r), site) * v.amplitudes[r];
  }
  return out;
}

// Levels left out of second-order sums, as per-sector masks.
struct Exclusion {
  std::vector<std::vector<bool>> mask;  // [sector][local]
  std::size_t count = 0;
  bool warning = false;
  std::string note;
};

Exclusion ground_exclusion(const Spectrum& spectrum) {
  Exclusion ex;
  for (const auto& s : spectrum.sectors()) {
    ex.mask.emplace_back(static_cast<std::size_t>(s.energies.size()), false);
  }
  auto manifold = degenerate_ground_manifold(spectrum);
  if (spectrum.n_sites() % 2 == 1 && manifold.size() == 1 && spectrum.size() > 1) {
    manifold.push_back(1);
    ex.warning = true;
    ex.note = "odd bus with lifted ground degeneracy: the two lowest levels were excluded";
  } else if (manifold.size() == 2 &&
             spectrum.level(manifold[0]).twice_sz != -spectrum.level(manifold[1]).twice_sz) {
    ex.warning = true;
    ex.note = "degenerate ground states are not spin-flip partners";
  } else if (manifold.size() > 2) {
    ex.warning = true;
    ex.note = "ground manifold has " + std::to_string(manifold.size()) + " states";
  }
  for (std::size_t idx : manifold) {
    const auto& l = spectrum.level(idx);
    ex.mask[l.sector][l.local] = true;
  }
  ex.count = manifold.size();
  return ex;
}

// sum over non-excluded n in sector of a_n b_n / (E0 - E_n), where a, b are
// the overlaps of the sector eigenvectors with u and w.
double resolvent_sum(const SectorSolution& sol, std::size_t sector, const Exclusion& ex, double e0,
                     const Eigen::VectorXd& u, const Eigen::VectorXd& w) {
  const Eigen::VectorXd a = sol.vectors.transpose() * u;
  const Eigen::VectorXd b = &u == &w ? a : Eigen::VectorXd(sol.vectors.transpose() * w);
  double sum = 0.0;
  for (Eigen::Index n = 0; n < sol.energies.size(); ++n) {
    if (ex.mask[sector][static_cast<std::size_t>(n)]) continue;
    sum += a(n) * b(n) / (e0 - sol.energies(n));
  }
  return sum;
}

std::size_t sector_index(const Spectrum& spectrum, const SectorSolution* sol) {
  return static_cast<std::size_t>(sol - spectrum.sectors().data());
}

ordered_json rounded(std::span<const double> values) { return round_to_15(values); }

ordered_json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round_to_15(v);
}

}  // namespace

std::vector<double> local_moments(const Spectrum& spectrum, std::size_t level) {
  const StateRef st = spectrum.state(level);
  std::vector<double> m(static_cast<std::size_t>(spectrum.n_sites()), 0.0);
  for (std::size_t r = 0; r < st.amplitudes.size(); ++r) {
    const double p = st.amplitudes[r] * st.amplitudes[r];
    const BitState s = st.basis->state(r);
    for (int i = 0; i < spectrum.n_sites(); ++i) m[static_cast<std::size_t>(i)] += p * pauli_z(s, i);
  }
  return m;
}

double zz_correlation(const Spectrum& spectrum, std::size_t level, int i, int j) {
  check_site(spectrum, i);
  check_site(spectrum, j);
  const StateRef st = spectrum.state(level);
  double c = 0.0;
  for (std::size_t r = 0; r < st.amplitudes.size(); ++r) {
    const BitState s = st.basis->state(r);
    c += st.amplitudes[r] * st.amplitudes[r] * pauli_z(s, i) * pauli_z(s, j);
  }
  return c;
}

J1Components j1_components(const Spectrum& spectrum) {
  if (spectrum.size() < 2) throw StateError("j1 needs the two lowest levels");
  const auto m0 = local_moments(spectrum, 0);
  const auto m1 = local_moments(spectrum, 1);
  const auto n = static_cast<std::size_t>(spectrum.n_sites());
  J1Components out;
  out.z.resize(n);
  out.x.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) out.z[i] = 0.5 * (m0[i] - m1[i]);

  const StateRef s0 = spectrum.state(0);
  const StateRef s1 = spectrum.state(1);
  if (std::abs(s0.basis->n_up() - s1.basis->n_up()) != 1) return out;
  out.x_defined = true;
  const Eigen::Map<const Eigen::VectorXd> v0(s0.amplitudes.data(), static_cast<Eigen::Index>(s0.amplitudes.size()));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.x[i] = v0.dot(flip_image(s1, static_cast<int>(i), *s0.basis, Flip::both));
    total += out.x[i];
  }
  if (total < 0) {
    for (double& x : out.x) x = -x;
  }
  return out;
}

double j1_second_order(const Spectrum& spectrum, int site) {
  check_site(spectrum, site);
  require_full(spectrum, "j1_second_order");
  const Exclusion ex = ground_exclusion(spectrum);
  const StateRef g = spectrum.state(0);
  const double e0 = spectrum.energy(0);
  double c = 0.0;
  if (const auto* up = spectrum.find_sector(g.basis->n_up() + 1)) {
    const Eigen::VectorXd u = flip_image(g, site, *up->basis, Flip::raise);
    c += resolvent_sum(*up, sector_index(spectrum, up), ex, e0, u, u);
  }
  if (const auto* down = spectrum.find_sector(g.basis->n_up() - 1)) {
    const Eigen::VectorXd u = flip_image(g, site, *down->basis, Flip::lower);
    c -= resolvent_sum(*down, sector_index(spectrum, down), ex, e0, u, u);
  }
  return 0.5 * c;
}

J2Result j2_exact(const Spectrum& spectrum, int i, int j, PauliAxis axis, std::size_t ground) {
  check_site(spectrum, i);
  check_site(spectrum, j);
  require_full(spectrum, "j2_exact");
  if (axis == PauliAxis::y) throw ParameterError("j2_exact supports the x and z axes");
  const Exclusion ex = ground_exclusion(spectrum);
  const Level& gl = spectrum.level(ground);
  if (!ex.mask[gl.sector][gl.local]) throw ParameterError("level " + std::to_string(ground) + " is not a ground state");
  const StateRef g = spectrum.state(ground);
  const double e0 = gl.energy;

  J2Result out;
  out.excluded = ex.count;
  out.warning = ex.warning;
  out.note = ex.note;
  double sum = 0.0;
  if (axis == PauliAxis::z) {
    const auto* sol = spectrum.find_sector(g.basis->n_up());
    const Eigen::VectorXd u = z_image(g, i);
    const Eigen::VectorXd w = z_image(g, j);
    sum = resolvent_sum(*sol, sector_index(spectrum, sol), ex, e0, u, w);
  } else {
    for (int delta : {+1, -1}) {
      const auto* sol = spectrum.find_sector(g.basis->n_up() + delta);
      if (!sol) continue;
      const Eigen::VectorXd u = flip_image(g, i, *sol->basis, Flip::both);
      const Eigen::VectorXd w = flip_image(g, j, *sol->basis, Flip::both);
      sum += resolvent_sum(*sol, sector_index(spectrum, sol), ex, e0, u, w);
    }
  }
  out.k = 0.5 * sum;
  return out;
}

double j2_approx_odd(const Spectrum& spectrum, int i, int j) {
  if (spectrum.n_sites() % 2 == 0) throw UsageError("j2_approx_odd applies to odd buses");
  if (spectrum.size() < 3) throw StateError("the odd closure needs the three lowest levels");
  const auto m = local_moments(spectrum, 0);
  check_site(spectrum, i);
  check_site(spectrum, j);
  const double d12 = spectrum.gap(1, 2);
  return (m[static_cast<std::size_t>(i)] * m[static_cast<std::size_t>(j)] - zz_correlation(spectrum, 0, i, j)) /
         (2.0 * d12);
}

double j2_approx_even(const Spectrum& spectrum, int i, int j) {
  if (spectrum.n_sites() % 2 == 1) throw UsageError("j2_approx_even applies to even buses");
  if (spectrum.size() < 2) throw StateError("the even closure needs the two lowest levels");
  return -zz_correlation(spectrum, 0, i, j) / (2.0 * spectrum.gap(0, 1));
}

GapDecomposition gap_decomposition(const SpinSystemSpec& spec, const Spectrum& spectrum) {
  if (spectrum.size() < 2) throw StateError("gap decomposition needs the two lowest levels");
  GapDecomposition d{};
  const StateRef s0 = spectrum.state(0);
  const StateRef s1 = spectrum.state(1);
  d.ej0 = exchange_energy(spec, *s0.basis, s0.amplitudes);
  d.ez0 = zeeman_energy(spec, *s0.basis, s0.amplitudes);
  d.ej1 = exchange_energy(spec, *s1.basis, s1.amplitudes);
  d.ez1 = zeeman_energy(spec, *s1.basis, s1.amplitudes);
  const double dj = d.ej1 - d.ej0;
  const double dz = d.ez1 - d.ez0;
  if (dz != 0.0) {
    d.ratio = std::abs(dj / dz);
  } else {
    d.ratio = dj == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return d;
}

double fidelity(const StateRef& a, const StateRef& b) {
  if (a.basis->n_sites() != b.basis->n_sites()) throw ParameterError("states belong to different systems");
  if (a.basis->n_up() != b.basis->n_up()) return 0.0;
  double dot = 0.0;
  for (std::size_t r = 0; r < a.amplitudes.size(); ++r) dot += a.amplitudes[r] * b.amplitudes[r];
  return std::min(1.0, std::abs(dot));
}

const char* to_string(FlipState f) noexcept {
  switch (f) {
    case FlipState::parallel: return "parallel";
    case FlipState::flipped: return "flipped";
    default: return "undefined";
  }
}

FlipState detect_flip(const Spectrum& spectrum, double b0) {
  const auto m = local_moments(spectrum, 0);
  double total = 0.0;
  for (double v : m) total += v;
  if (b0 == 0.0 || std::abs(total) < 0.5) return FlipState::undefined;
  return (total > 0) == (b0 > 0) ? FlipState::parallel : FlipState::flipped;
}

EffectiveReport effective_report(const SpinSystemSpec& spec, const Spectrum& spectrum,
                                 std::optional<std::pair<int, int>> pair) {
  EffectiveReport r;
  r.m = local_moments(spectrum, 0);
  for (double v : r.m) r.m_total += v;
  if (spectrum.size() >= 2) {
    r.j1 = j1_components(spectrum);
    if (!r.j1.x_defined) r.warnings.push_back("levels 0 and 1 are not connected by sigma_x; j1.x set to 0");
    r.d01 = spectrum.gap(0, 1);
    r.decomposition = gap_decomposition(spec, spectrum);
  }
  if (spectrum.size() >= 3) r.d12 = spectrum.gap(1, 2);
  if (pair) {
    r.pair_i = pair->first;
    r.pair_j = pair->second;
    r.j2_zz = j2_exact(spectrum, pair->first, pair->second, PauliAxis::z);
    r.j2_xx = j2_exact(spectrum, pair->first, pair->second, PauliAxis::x);
    if (r.j2_zz->warning) r.warnings.push_back("j2: " + r.j2_zz->note);
  }
  return r;
}

std::string effective_report_json(const EffectiveReport& r) {
  ordered_json j;
  j["m"] = rounded(r.m);
  j["m_total"] = round_to_15(r.m_total);
  j["j1"] = {{"z", rounded(r.j1.z)}, {"x", rounded(r.j1.x)}, {"x_defined", r.j1.x_defined}};
  if (r.j2_zz) {
    j["j2"] = {{"pair", {*r.pair_i + 1, *r.pair_j + 1}},
               {"zz", round_to_15(r.j2_zz->k)},
               {"xx", round_to_15(r.j2_xx->k)},
               {"excluded_levels", r.j2_zz->excluded}};
  } else {
    j["j2"] = nullptr;
  }
  j["gaps"] = {{"d01", round_to_15(r.d01)}, {"d12", r.d12 ? number_or_null(*r.d12) : ordered_json(nullptr)}};
  j["decomposition"] = {{"ej0", round_to_15(r.decomposition.ej0)},
                        {"ez0", round_to_15(r.decomposition.ez0)},
                        {"ej1", round_to_15(r.decomposition.ej1)},
                        {"ez1", round_to_15(r.decomposition.ez1)},
                        {"ratio", number_or_null(r.decomposition.ratio)}};
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

namespace {

// Like attach_qubits but tolerates zero couplings, which validation uses
// for the decoupled reference point.
SpinSystemSpec compound_system(const SpinSystemSpec& bus, std::span<const QubitAttachment> attachments,
                               std::vector<std::string>* warnings) {
  std::vector<QubitAttachment> positive(attachments.begin(), attachments.end());
  for (auto& a : positive) {
    if (a.coupling < 0 || !std::isfinite(a.coupling)) throw ParameterError("qubit-bus coupling must be >= 0");
    if (a.coupling == 0.0) a.coupling = 1.0;
  }
  const SpinSystemSpec tmp = attach_qubits(bus, positive, warnings);
  auto bonds = tmp.bonds();
  const std::size_t first = bus.bonds().size();
  for (std::size_t q = 0; q < attachments.size(); ++q) bonds[first + q].coupling = attachments[q].coupling;
  return SpinSystemSpec(tmp.n_sites(), std::move(bonds), tmp.fields(), tmp.label());
}

std::vector<double> splittings(const Spectrum& s, std::size_t count) {
  std::vector<double> out;
  for (std::size_t n = 1; n < count && n < s.size(); ++n) out.push_back(s.energy(n) - s.energy(0));
  return out;
}

double max_abs_difference(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

ValidationReport validate_effective(const SpinSystemSpec& bus, std::span<const QubitAttachment> attachments,
                                    std::span<const double> scales) {
  if (!bus.has_zero_field()) throw ParameterError("validation expects a bus at zero field");
  if (attachments.empty()) throw ParameterError("validation needs at least one attached qubit");
  ValidationReport rep;
  rep.n_bus = bus.n_sites();
  rep.odd = bus.n_sites() % 2 == 1;
  rep.attachments.assign(attachments.begin(), attachments.end());

  const Spectrum bus_spectrum = full_spectrum(bus);
  const auto m = local_moments(bus_spectrum, 0);
  for (const auto& a : attachments) {
    if (a.bus_site < 0 || a.bus_site >= bus.n_sites()) {
      throw ParameterError("qubit attached to nonexistent bus site " + std::to_string(a.bus_site));
    }
    rep.m.push_back(m[static_cast<std::size_t>(a.bus_site)]);
    rep.c.push_back(rep.odd ? j1_second_order(bus_spectrum, a.bus_site) : 0.0);
  }
  if (attachments.size() == 2) {
    const auto k = j2_exact(bus_spectrum, attachments[0].bus_site, attachments[1].bus_site, PauliAxis::z);
    rep.k = k.k;
    if (k.warning) rep.warnings.push_back("j2: " + k.note);
  }

  const std::vector<double> unit{1.0};
  if (scales.empty()) scales = unit;
  const int n_q = static_cast<int>(attachments.size());
  const int n_eff = n_q + (rep.odd ? 1 : 0);
  const std::size_t n_levels = std::size_t{1} << n_eff;
  std::set<std::string> seen_warnings(rep.warnings.begin(), rep.warnings.end());

  for (double scale : scales) {
    ValidationPoint p;
    std::vector<QubitAttachment> scaled(attachments.begin(), attachments.end());
    for (auto& a : scaled) {
      a.coupling *= scale;
      p.couplings.push_back(a.coupling);
    }
    std::vector<std::string> w;
    const SpinSystemSpec full = compound_system(bus, scaled, &w);
    for (auto& s : w) {
      if (seen_warnings.insert(s).second) rep.warnings.push_back(s);
    }
    p.full_splittings = splittings(lowest_k(full, n_levels), n_levels);

    for (bool renormalized : {true, false}) {
      std::vector<Bond> bonds;
      if (rep.odd) {
        for (int q = 0; q < n_q; ++q) {
          const double jq = p.couplings[static_cast<std::size_t>(q)];
          double j1 = jq * rep.m[static_cast<std::size_t>(q)];
          if (renormalized) j1 += jq * jq * rep.c[static_cast<std::size_t>(q)];
          bonds.push_back({q, n_q, j1});
        }
      }
      if (n_q == 2) bonds.push_back({0, 1, rep.k * p.couplings[0] * p.couplings[1]});
      const SpinSystemSpec eff(n_eff, std::move(bonds), std::vector<double>(static_cast<std::size_t>(n_eff), 0.0));
      auto split = splittings(full_spectrum(eff), n_levels);
      (renormalized ? p.effective_splittings : p.bare_splittings) = std::move(split);
    }
    p.discrepancy = max_abs_difference(p.full_splittings, p.effective_splittings);
    p.bare_discrepancy = max_abs_difference(p.full_splittings, p.bare_splittings);
    rep.points.push_back(std::move(p));
  }
  for (std::size_t i = 0; i + 1 < rep.points.size(); ++i) {
    const double next = rep.points[i + 1].discrepancy;
    rep.shrink_ratios.push_back(next > 0 ? rep.points[i].discrepancy / next
                                         : std::numeric_limits<double>::infinity());
  }
  return rep;
}

std::string validation_report_json(const ValidationReport& r) {
  ordered_json j;
  j["n_bus"] = r.n_bus;
  j["parity"] = r.odd ? "odd" : "even";
  auto atts = ordered_json::array();
  for (std::size_t q = 0; q < r.attachments.size(); ++q) {
    atts.push_back({{"qubit", std::string(1, r.attachments[q].qubit)},
                    {"site", r.attachments[q].bus_site + 1},
                    {"coupling", round_to_15(r.attachments[q].coupling)},
                    {"m", round_to_15(r.m[q])},
                    {"c", round_to_15(r.c[q])}});
  }
  j["attachments"] = std::move(atts);
  j["k"] = round_to_15(r.k);
  auto pts = ordered_json::array();
  for (const auto& p : r.points) {
    pts.push_back({{"couplings", rounded(p.couplings)},
                   {"full_splittings", rounded(p.full_splittings)},
                   {"effective_splittings", rounded(p.effective_splittings)},
                   {"first_order_splittings", rounded(p.bare_splittings)},
                   {"discrepancy", round_to_15(p.discrepancy)},
                   {"first_order_discrepancy", round_to_15(p.bare_discrepancy)}});
  }
  j["points"] = std::move(pts);
  auto ratios = ordered_json::array();
  for (double v : r.shrink_ratios) ratios.push_back(number_or_null(v));
  j["shrink_ratios"] = std::move(ratios);
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

}  // namespace spinbus
