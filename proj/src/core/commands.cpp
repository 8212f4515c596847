#include "core/commands.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "core/effective.hpp"
#include "core/eigensolver.hpp"
#include "core/ensemble.hpp"
#include "core/errors.hpp"
#include "core/format.hpp"
#include "core/scaling.hpp"

namespace spinbus {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const std::vector<std::string> kSystemKeys{"spec", "n_sites", "boundary", "couplings", "fields", "b0"};

void allow_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

std::vector<std::string> with_system_keys(std::vector<std::string> keys) {
  keys.insert(keys.end(), kSystemKeys.begin(), kSystemKeys.end());
  return keys;
}

template <typename T>
T get(const json& j, const char* key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("key '") + key + "': " + e.what());
  }
}

template <typename T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing required key '") + key + "'");
  return get<T>(j, key, T{});
}

SpinSystemSpec with_uniform_field(const SpinSystemSpec& spec, double b0) {
  return SpinSystemSpec(spec.n_sites(), spec.bonds(), std::vector<double>(static_cast<std::size_t>(spec.n_sites()), b0),
                        spec.label());
}

bool dense_feasible(const SpinSystemSpec& spec) {
  return binomial(spec.n_sites(), spec.n_sites() / 2) <= kDenseDimensionCap;
}

// ---------------------------------------------------------------- spectrum

CommandResult cmd_spectrum(const json& config) {
  allow_keys(config, with_system_keys({"k", "eigenvectors", "eigenvector_levels", "sweep"}), "spectrum");
  CommandResult out;
  ordered_json& resolved = out.resolved_config;
  const SpinSystemSpec spec = system_from_config(config, resolved);
  const std::size_t total = std::size_t{1} << spec.n_sites();

  std::optional<std::size_t> k;
  if (config.contains("k") && !config.at("k").is_null()) {
    const auto requested = get<long long>(config, "k", 0);
    if (requested < 1) throw ConfigError("k must be at least 1");
    k = static_cast<std::size_t>(requested);
    if (*k > total) {
      out.warnings.push_back("k = " + std::to_string(*k) + " exceeds 2^N = " + std::to_string(total) +
                             "; clamped");
      k = total;
    }
  }
  resolved["k"] = k ? ordered_json(*k) : ordered_json(nullptr);
  const Spectrum spectrum = k ? lowest_k(spec, *k) : full_spectrum(spec);
  out.files.push_back({"spectrum.csv", spectrum_to_csv(spectrum)});

  const auto vec_mode = get<std::string>(config, "eigenvectors", "none");
  const auto vec_levels = get<std::size_t>(config, "eigenvector_levels", 1);
  resolved["eigenvectors"] = vec_mode;
  resolved["eigenvector_levels"] = vec_levels;
  if (vec_mode == "csv") {
    out.files.push_back({"eigenvectors.csv", eigenvectors_to_csv(spectrum, vec_levels)});
  } else if (vec_mode == "binary") {
    out.files.push_back({"eigenvectors.bin", eigenvectors_to_binary(spectrum, vec_levels)});
  } else if (vec_mode != "none") {
    throw ConfigError("eigenvectors must be none, csv or binary");
  }

  if (config.contains("sweep") && !config.at("sweep").is_null()) {
    const json& sw = config.at("sweep");
    allow_keys(sw, {"b0_min", "b0_max", "steps", "levels", "crossing_levels", "crossing_tol"}, "spectrum.sweep");
    const double b_min = get<double>(sw, "b0_min", 0.0);
    const double b_max = get<double>(sw, "b0_max", 0.5);
    const int steps = get<int>(sw, "steps", 51);
    auto levels = get<std::size_t>(sw, "levels", 4);
    const double tol = get<double>(sw, "crossing_tol", 1e-6);
    if (steps < 2 || !(b_max > b_min)) throw ConfigError("sweep needs b0_max > b0_min and at least 2 steps");
    if (levels < 1) throw ConfigError("sweep levels must be at least 1");
    if (levels > total) {
      out.warnings.push_back("sweep levels clamped to 2^N");
      levels = total;
    }
    std::vector<std::size_t> pairs;
    if (sw.contains("crossing_levels")) {
      pairs = get<std::vector<std::size_t>>(sw, "crossing_levels", {});
    } else {
      for (std::size_t a = 0; a + 1 < levels; ++a) pairs.push_back(a);
    }
    ordered_json rs;
    rs["b0_min"] = b_min;
    rs["b0_max"] = b_max;
    rs["steps"] = steps;
    rs["levels"] = levels;
    rs["crossing_levels"] = pairs;
    rs["crossing_tol"] = tol;
    resolved["sweep"] = rs;

    std::vector<std::string> header{"b0"};
    for (std::size_t l = 0; l < levels; ++l) header.push_back("E" + std::to_string(l));
    CsvWriter csv(header);
    std::vector<std::string> row(header.size());
    for (int s = 0; s < steps; ++s) {
      const double b = b_min + (b_max - b_min) * s / (steps - 1);
      const Spectrum sp = lowest_k(with_uniform_field(spec, b), levels);
      row[0] = format_number(b);
      for (std::size_t l = 0; l < levels; ++l) row[l + 1] = format_number(sp.energy(l));
      csv.row(row);
    }
    out.files.push_back({"sweep.csv", csv.str()});

    ordered_json crossings = ordered_json::array();
    for (std::size_t a : pairs) {
      if (a + 1 >= total) throw ConfigError("crossing level " + std::to_string(a) + " out of range");
      for (const auto& c : find_crossings(spec, a, b_min, b_max, steps, tol)) {
        crossings.push_back({{"levels", {c.lower, c.lower + 1}}, {"b0", round_to_15(c.b0)}, {"gap", round_to_15(c.gap)}});
      }
    }
    out.files.push_back({"crossings.json", ordered_json{{"crossings", crossings}}.dump(2) + "\n"});
  }
  return out;
}

// --------------------------------------------------------------- effective

CommandResult cmd_effective(const json& config) {
  allow_keys(config, with_system_keys({"pair"}), "effective");
  CommandResult out;
  ordered_json& resolved = out.resolved_config;
  const SpinSystemSpec spec = system_from_config(config, resolved);
  const int n = spec.n_sites();

  std::optional<std::pair<int, int>> pair;
  if (!config.contains("pair")) {
    if (n >= 2) pair = std::make_pair(0, n - 1);
  } else if (!config.at("pair").is_null()) {
    const auto p = get<std::vector<int>>(config, "pair", {});
    if (p.size() != 2 || p[0] < 1 || p[1] < 1 || p[0] > n || p[1] > n) {
      throw ConfigError("pair must be two 1-based site indices");
    }
    pair = std::make_pair(p[0] - 1, p[1] - 1);
  }
  if (pair && !dense_feasible(spec)) {
    out.warnings.push_back("K needs a full spectrum, which exceeds the dense cap; j2 omitted");
    pair.reset();
  }
  resolved["pair"] = pair ? ordered_json{pair->first + 1, pair->second + 1} : ordered_json(nullptr);

  const Spectrum spectrum = pair ? full_spectrum(spec) : lowest_k(spec, std::min<std::size_t>(3, std::size_t{1} << n));
  EffectiveReport rep = effective_report(spec, spectrum, pair);
  for (const auto& w : rep.warnings) out.warnings.push_back(w);
  out.files.push_back({"effective.json", effective_report_json(rep)});

  CsvWriter csv({"site", "m", "j1_z", "j1_x"});
  for (int i = 0; i < n; ++i) {
    const auto s = static_cast<std::size_t>(i);
    csv.row({std::to_string(i + 1), format_number(rep.m[s]), format_number(rep.j1.z.empty() ? 0.0 : rep.j1.z[s]),
             format_number(rep.j1.x.empty() ? 0.0 : rep.j1.x[s])});
  }
  out.files.push_back({"moments.csv", csv.str()});
  return out;
}

// ---------------------------------------------------------------- ensemble

CommandResult cmd_ensemble(const json& config, unsigned threads) {
  allow_keys(config,
             {"n_sites", "b0", "sigma_J", "sigma_B", "n_samples", "master_seed", "boundary", "mode", "observables",
              "b0_grid", "sigma_B_grid", "parameter", "grid"},
             "ensemble");
  if (!config.contains("master_seed")) throw ConfigError("master_seed is required for ensemble runs (use --seed)");
  json disorder = json::object();
  for (const char* key : {"n_sites", "b0", "sigma_J", "sigma_B", "n_samples", "master_seed", "boundary"}) {
    if (config.contains(key)) disorder[key] = config.at(key);
  }
  const DisorderConfig dc = disorder_config_from_json(disorder);
  dc.validate();

  CommandResult out;
  ordered_json& resolved = out.resolved_config;
  resolved = to_json(dc);
  // Keep the exact inputs; to_json rounds for display.
  resolved["b0"] = dc.b0;
  resolved["sigma_J"] = dc.sigma_j;
  resolved["sigma_B"] = dc.sigma_b;
  const auto mode = get<std::string>(config, "mode", "samples");
  resolved["mode"] = mode;

  auto observables = [&] {
    const auto obs = get<std::vector<std::string>>(config, "observables", {});
    if (obs.empty()) throw UsageError("ensemble needs a non-empty observable list");
    resolved["observables"] = obs;
    return obs;
  };

  if (mode == "samples") {
    const auto obs = observables();
    const EnsembleStats stats = run_ensemble(dc, obs, threads);
    out.files.push_back({"ensemble.csv", ensemble_to_csv(stats)});
    out.files.push_back({"summary.json", ensemble_summary_json(stats)});
    if (stats.resample_count > 0) {
      out.warnings.push_back(std::to_string(stats.resample_count) + " J samples redrawn for non-positive couplings");
    }
  } else if (mode == "flip_grid") {
    const auto b0s = require<std::vector<double>>(config, "b0_grid");
    const auto sbs = require<std::vector<double>>(config, "sigma_B_grid");
    resolved["b0_grid"] = b0s;
    resolved["sigma_B_grid"] = sbs;
    const auto rows = flip_fraction_grid(dc, b0s, sbs, threads);
    out.files.push_back({"flip_grid.csv", flip_grid_to_csv(rows)});
  } else if (mode == "sensitivity") {
    const auto param = sweep_parameter_from_string(get<std::string>(config, "parameter", "sigma_J"));
    const auto grid = require<std::vector<double>>(config, "grid");
    const auto obs = observables();
    resolved["parameter"] = to_string(param);
    resolved["grid"] = grid;
    const auto table = sensitivity_sweep(dc, param, grid, obs, threads);
    out.files.push_back({"sensitivity.csv", sensitivity_to_csv(table)});
    out.files.push_back({"sensitivity.json", sensitivity_to_json(table)});
  } else if (mode == "halfnormal") {
    const auto h = halfnormal_gap_check(dc, threads);
    ordered_json j{{"empirical_mean_gap", round_to_15(h.empirical)},
                   {"oracle_mean_abs", round_to_15(h.oracle)},
                   {"half_normal_mean", round_to_15(h.analytic)},
                   {"sigma_over_sqrt_2pi", round_to_15(h.alt_form)},
                   {"ratio_to_half_normal", round_to_15(h.ratio)}};
    out.files.push_back({"halfnormal.json", j.dump(2) + "\n"});
    if (config.contains("b0_grid")) {
      const auto b0s = get<std::vector<double>>(config, "b0_grid", {});
      resolved["b0_grid"] = b0s;
      CsvWriter csv({"b0", "mean_gap", "hyperbola"});
      for (const auto& r : gap_vs_b0(dc, b0s, threads)) {
        csv.row({format_number(r.b0), format_number(r.mean_gap), format_number(r.hyperbola)});
      }
      out.files.push_back({"gap_sweep.csv", csv.str()});
    }
  } else {
    throw ConfigError("mode must be samples, flip_grid, sensitivity or halfnormal");
  }
  return out;
}

// ----------------------------------------------------------------- scaling

CommandResult cmd_scaling(const json& config, unsigned threads) {
  allow_keys(config, {"n_min", "n_max", "boundary", "gap_fit", "moment_fit"}, "scaling");
  CommandResult out;
  ordered_json& resolved = out.resolved_config;
  const int n_min = get<int>(config, "n_min", 2);
  const int n_max = get<int>(config, "n_max", kScalingMaxSites);
  const auto boundary = get<std::string>(config, "boundary", "open");
  auto gap_range = get<std::vector<int>>(config, "gap_fit", {std::max(n_min, 4), std::min(n_max, 16)});
  auto moment_range = get<std::vector<int>>(config, "moment_fit", {std::max(n_min, 5), std::min(n_max, 19)});
  if (gap_range.size() != 2 || moment_range.size() != 2) throw ConfigError("fit ranges are [N_min, N_max] pairs");
  if (boundary != "open" && boundary != "ring" && boundary != "both") {
    throw ConfigError("boundary must be open, ring or both");
  }
  if (n_max > kScalingMaxSites) {
    throw ConfigError("n_max = " + std::to_string(n_max) + " exceeds the limit of " + std::to_string(kScalingMaxSites));
  }
  resolved["n_min"] = n_min;
  resolved["n_max"] = n_max;
  resolved["boundary"] = boundary;
  resolved["gap_fit"] = gap_range;
  resolved["moment_fit"] = moment_range;

  std::vector<ScalingRow> rows;
  ordered_json fits;
  auto add_fits = [&](const std::vector<ScalingRow>& part, const char* name) {
    ordered_json f;
    try {
      const GapFit g = fit_gap(part, gap_range[0], gap_range[1]);
      f["gap"] = {{"c", round_to_15(g.c)},
                  {"rms", round_to_15(g.rms)},
                  {"range", {g.n_min, g.n_max}},
                  {"pi2_over_2", round_to_15(std::numbers::pi * std::numbers::pi / 2)},
                  {"pi2", round_to_15(std::numbers::pi * std::numbers::pi)}};
    } catch (const ParameterError& e) {
      f["gap"] = nullptr;
      out.warnings.push_back(std::string(name) + " gap fit skipped: " + e.what());
    }
    const bool has_moments = std::count_if(part.begin(), part.end(), [&](const ScalingRow& r) {
                               return r.m_end && r.n_sites >= moment_range[0] && r.n_sites <= moment_range[1];
                             }) >= 2;
    if (has_moments) {
      const MomentFit m = fit_end_moment(part, moment_range[0], moment_range[1]);
      f["end_moment"] = {{"slope", round_to_15(m.slope)}, {"intercept", round_to_15(m.intercept)}, {"n", m.n_values}};
    } else {
      f["end_moment"] = nullptr;
    }
    fits[name] = f;
  };
  if (boundary == "open" || boundary == "both") {
    auto part = scaling_rows(n_min, n_max, Boundary::open, threads);
    add_fits(part, "open");
    rows.insert(rows.end(), part.begin(), part.end());
  }
  if (boundary == "ring" || boundary == "both") {
    auto part = scaling_rows(std::max(n_min, 3), n_max, Boundary::ring, threads);
    add_fits(part, "ring");
    rows.insert(rows.end(), part.begin(), part.end());
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ScalingRow& a, const ScalingRow& b) { return a.n_sites < b.n_sites; });
  out.files.push_back({"scaling.csv", scaling_to_csv(rows)});
  out.files.push_back({"fits.json", fits.dump(2) + "\n"});
  return out;
}

// ---------------------------------------------------------------- validate

CommandResult cmd_validate(const json& config) {
  allow_keys(config, with_system_keys({"attachments", "scales"}), "validate");
  CommandResult out;
  ordered_json& resolved = out.resolved_config;
  const SpinSystemSpec bus = system_from_config(config, resolved);
  std::vector<QubitAttachment> atts;
  if (config.contains("attachments")) {
    for (const auto& a : config.at("attachments")) {
      allow_keys(a, {"qubit", "site", "coupling"}, "validate.attachments");
      const auto label = require<std::string>(a, "qubit");
      if (label.size() != 1) throw ConfigError("qubit label must be A or B");
      atts.push_back({label[0], require<int>(a, "site") - 1, require<double>(a, "coupling")});
    }
  } else {
    atts = {{'A', 0, 0.02}, {'B', bus.n_sites() - 1, 0.02}};
  }
  const auto scales = get<std::vector<double>>(config, "scales", {1.0, 0.5});
  ordered_json ra = ordered_json::array();
  for (const auto& a : atts) ra.push_back({{"qubit", std::string(1, a.qubit)}, {"site", a.bus_site + 1}, {"coupling", a.coupling}});
  resolved["attachments"] = ra;
  resolved["scales"] = scales;

  const ValidationReport rep = validate_effective(bus, atts, scales);
  for (const auto& w : rep.warnings) out.warnings.push_back(w);
  out.files.push_back({"validate.json", validation_report_json(rep)});
  return out;
}

double level_gap(const SpinSystemSpec& spec, std::size_t lower, double b) {
  const Spectrum s = lowest_k(with_uniform_field(spec, b), lower + 2);
  // Levels inside a tie cluster may be ordered by s_z, not energy.
  return std::max(0.0, s.energy(lower + 1) - s.energy(lower));
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"spectrum", "effective", "ensemble", "scaling", "validate"};
  return names;
}

SpinSystemSpec system_from_config(const json& config, ordered_json& resolved) {
  if (config.contains("spec")) {
    for (const char* key : {"n_sites", "boundary", "couplings", "fields", "b0"}) {
      if (config.contains(key)) throw ConfigError(std::string("'spec' cannot be combined with '") + key + "'");
    }
    SpinSystemSpec spec = spec_from_json(config.at("spec").dump());
    resolved["spec"] = ordered_json::parse(spec_to_json(spec));
    return spec;
  }
  const int n = require<int>(config, "n_sites");
  const auto boundary = boundary_from_string(get<std::string>(config, "boundary", "open"));
  if (n < 1 || n > kMaxSites) throw ConfigError("n_sites must be in [1, " + std::to_string(kMaxSites) + "]");
  const std::size_t n_bonds = n == 1 ? 0 : boundary == Boundary::ring ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n - 1);
  const auto couplings = get<std::vector<double>>(config, "couplings", std::vector<double>(n_bonds, 1.0));
  if (config.contains("fields") && config.contains("b0")) throw ConfigError("give either 'fields' or 'b0', not both");
  const double b0 = get<double>(config, "b0", 0.0);
  const auto fields = get<std::vector<double>>(config, "fields", std::vector<double>(static_cast<std::size_t>(n), b0));
  resolved["n_sites"] = n;
  resolved["boundary"] = to_string(boundary);
  resolved["couplings"] = couplings;
  resolved["fields"] = fields;
  try {
    if (n == 1) {
      if (!couplings.empty()) throw ParameterError("a single site has no bonds");
      return SpinSystemSpec(1, {}, fields);
    }
    return boundary == Boundary::ring ? make_ring(n, couplings, fields) : make_chain(n, couplings, fields);
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
}

std::vector<Crossing> find_crossings(const SpinSystemSpec& spec, std::size_t lower, double b_min, double b_max,
                                     int steps, double tol) {
  std::vector<double> b(static_cast<std::size_t>(steps)), g(static_cast<std::size_t>(steps));
  for (int s = 0; s < steps; ++s) {
    b[static_cast<std::size_t>(s)] = b_min + (b_max - b_min) * s / (steps - 1);
    g[static_cast<std::size_t>(s)] = level_gap(spec, lower, b[static_cast<std::size_t>(s)]);
  }
  std::vector<Crossing> out;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (std::size_t s = 0; s < g.size(); ++s) {
    const bool left_ok = s == 0 || g[s] < g[s - 1];
    const bool right_ok = s + 1 == g.size() || g[s] <= g[s + 1];
    if (!left_ok || !right_ok) continue;
    double lo = b[s == 0 ? 0 : s - 1];
    double hi = b[std::min(s + 1, g.size() - 1)];
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = level_gap(spec, lower, x1), f2 = level_gap(spec, lower, x2);
    for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - phi * (hi - lo);
        f1 = level_gap(spec, lower, x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + phi * (hi - lo);
        f2 = level_gap(spec, lower, x2);
      }
    }
    double best_b = 0.5 * (lo + hi);
    double best_g = level_gap(spec, lower, best_b);
    if (g[s] < best_g) {
      best_b = b[s];
      best_g = g[s];
    }
    if (best_g < tol) out.push_back({lower, best_b, best_g});
  }
  return out;
}

CommandResult run_command(const std::string& command, const json& config, unsigned threads) {
  if (command == "spectrum") return cmd_spectrum(config);
  if (command == "effective") return cmd_effective(config);
  if (command == "ensemble") return cmd_ensemble(config, threads);
  if (command == "scaling") return cmd_scaling(config, threads);
  if (command == "validate") return cmd_validate(config);
  throw UsageError("unknown command '" + command + "'");
}

}  // namespace spinbus
