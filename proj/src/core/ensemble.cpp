#include "core/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <numbers>
#include <optional>
#include <thread>

#include "core/effective.hpp"
#include "core/eigensolver.hpp"
#include "core/errors.hpp"
#include "core/format.hpp"
#include "core/rng.hpp"

namespace spinbus {

const char* to_string(Boundary b) noexcept { return b == Boundary::ring ? "ring" : "open"; }

Boundary boundary_from_string(const std::string& s) {
  if (s == "open" || s == "chain") return Boundary::open;
  if (s == "ring") return Boundary::ring;
  throw ConfigError("boundary must be 'open' or 'ring', got '" + s + "'");
}

void DisorderConfig::validate() const {
  if (n_sites < 1 || n_sites > kMaxSites) throw ConfigError("n_sites out of range");
  if (boundary == Boundary::ring && n_sites < 3) throw ConfigError("a ring needs at least three sites");
  if (!(sigma_j >= 0.0) || !(sigma_b >= 0.0)) throw ConfigError("sigma_J and sigma_B must be >= 0");
  if (!std::isfinite(b0) || !std::isfinite(sigma_j) || !std::isfinite(sigma_b)) {
    throw ConfigError("disorder parameters must be finite");
  }
  if (n_samples < 1) throw ConfigError("n_samples must be at least 1");
}

nlohmann::ordered_json to_json(const DisorderConfig& c) {
  return {{"n_sites", c.n_sites},         {"b0", round_to_15(c.b0)},
          {"sigma_J", round_to_15(c.sigma_j)}, {"sigma_B", round_to_15(c.sigma_b)},
          {"n_samples", c.n_samples},     {"master_seed", c.master_seed},
          {"boundary", to_string(c.boundary)}};
}

DisorderConfig disorder_config_from_json(const nlohmann::json& j, const DisorderConfig& defaults) {
  if (!j.is_object()) throw ConfigError("disorder config must be an object");
  DisorderConfig c = defaults;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "n_sites") c.n_sites = value.get<int>();
      else if (key == "b0") c.b0 = value.get<double>();
      else if (key == "sigma_J") c.sigma_j = value.get<double>();
      else if (key == "sigma_B") c.sigma_b = value.get<double>();
      else if (key == "n_samples") c.n_samples = value.get<std::size_t>();
      else if (key == "master_seed") c.master_seed = value.get<std::uint64_t>();
      else if (key == "boundary") c.boundary = boundary_from_string(value.get<std::string>());
      else throw ConfigError("unknown disorder key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("disorder config: ") + e.what());
  }
  return c;
}

Sample sample_spec(const DisorderConfig& config, std::size_t index) {
  config.validate();
  if (index >= config.n_samples) throw ParameterError("sample index beyond n_samples");
  Random rng(child_seed(config.master_seed, index));
  const int n = config.n_sites;
  const std::size_t n_bonds = n == 1 ? 0
                              : config.boundary == Boundary::ring ? static_cast<std::size_t>(n)
                                                                  : static_cast<std::size_t>(n - 1);
  std::vector<double> j(n_bonds);
  int redraws = 0;
  for (;;) {
    for (double& v : j) v = rng.normal(1.0, config.sigma_j);
    if (std::all_of(j.begin(), j.end(), [](double v) { return v > 0.0; })) break;
    if (++redraws > kMaxRedraws) {
      throw ConfigError("more than " + std::to_string(kMaxRedraws) +
                        " redraws needed for positive couplings; sigma_J is too large");
    }
  }
  std::vector<double> b(static_cast<std::size_t>(n));
  for (double& v : b) v = rng.normal(config.b0, config.sigma_b);

  const std::string label = "master_seed=" + std::to_string(config.master_seed) + " sample=" + std::to_string(index);
  if (n == 1) return {SpinSystemSpec(1, {}, std::move(b), label), redraws};
  SpinSystemSpec spec = config.boundary == Boundary::ring ? make_ring(n, j, b) : make_chain(n, j, b);
  spec.set_label(label);
  return {std::move(spec), redraws};
}

namespace {

enum class Kind { energy, d01, d12, moment, m_total, k, j1z, j1x, fidelity, flip, ej0, ez0, ej1, ez1 };

struct Observable {
  Kind kind;
  int a = 0;  // level or 0-based site
  int b = 0;
  PauliAxis axis = PauliAxis::z;
};

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  if (s.empty()) return std::nullopt;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

Observable parse_observable(const std::string& name, int n_sites) {
  auto site = [&](std::optional<int> v) {
    if (!v || *v < 1 || *v > n_sites) {
      throw ConfigError("observable '" + name + "': site must be in 1.." + std::to_string(n_sites));
    }
    return *v - 1;
  };
  const std::string_view s = name;
  if (s == "d01") return {Kind::d01};
  if (s == "d12") return {Kind::d12};
  if (s == "m_total") return {Kind::m_total};
  if (s == "fidelity") return {Kind::fidelity};
  if (s == "flip") return {Kind::flip};
  if (s == "EJ0") return {Kind::ej0};
  if (s == "EZ0") return {Kind::ez0};
  if (s == "EJ1") return {Kind::ej1};
  if (s == "EZ1") return {Kind::ez1};
  if (s.size() == 2 && s[0] == 'E' && s[1] >= '0' && s[1] <= '3') return {Kind::energy, s[1] - '0'};
  if (s.starts_with("j1z")) return {Kind::j1z, site(parse_int(s.substr(3)))};
  if (s.starts_with("j1x")) return {Kind::j1x, site(parse_int(s.substr(3)))};
  if (s.starts_with("m")) return {Kind::moment, site(parse_int(s.substr(1)))};
  if (s.starts_with("K") && (s.ends_with("_zz") || s.ends_with("_xx"))) {
    const auto body = s.substr(1, s.size() - 4);
    const auto us = body.find('_');
    if (us != std::string_view::npos) {
      return {Kind::k, site(parse_int(body.substr(0, us))), site(parse_int(body.substr(us + 1))),
              s.ends_with("_zz") ? PauliAxis::z : PauliAxis::x};
    }
  }
  throw ConfigError("unknown observable '" + name + "'");
}

std::size_t levels_needed(const Observable& o) {
  switch (o.kind) {
    case Kind::energy: return static_cast<std::size_t>(o.a) + 1;
    case Kind::d12: return 3;
    case Kind::d01:
    case Kind::j1z:
    case Kind::j1x:
    case Kind::ej0:
    case Kind::ez0:
    case Kind::ej1:
    case Kind::ez1: return 2;
    default: return 1;
  }
}

struct Plan {
  std::vector<Observable> observables;
  std::size_t levels = 1;
  bool full = false;
};

Plan make_plan(const std::vector<std::string>& names, int n_sites) {
  if (names.empty()) throw UsageError("no observables requested");
  Plan p;
  for (const auto& n : names) {
    p.observables.push_back(parse_observable(n, n_sites));
    p.levels = std::max(p.levels, levels_needed(p.observables.back()));
    if (p.observables.back().kind == Kind::k) p.full = true;
  }
  if (p.levels > (std::size_t{1} << n_sites)) {
    throw ConfigError("observables need " + std::to_string(p.levels) + " levels but a " +
                      std::to_string(n_sites) + "-site system has " + std::to_string(std::size_t{1} << n_sites));
  }
  if (p.full && binomial(n_sites, n_sites / 2) > kDenseDimensionCap) {
    throw ConfigError("K observables need a full spectrum, which exceeds the dense cap at N=" +
                      std::to_string(n_sites));
  }
  return p;
}

struct Evaluated {
  std::vector<double> values;
  int redraws = 0;
};

Evaluated evaluate(const DisorderConfig& config, const Plan& plan, std::size_t index, const Spectrum* reference) {
  Sample sample = sample_spec(config, index);
  const SpinSystemSpec& spec = sample.spec;
  const Spectrum spectrum = plan.full ? full_spectrum(spec) : lowest_k(spec, plan.levels);
  Evaluated out;
  out.redraws = sample.redraws;

  std::optional<std::vector<double>> m;
  std::optional<J1Components> j1;
  std::optional<GapDecomposition> dec;
  auto moments = [&]() -> const std::vector<double>& {
    if (!m) m = local_moments(spectrum, 0);
    return *m;
  };
  auto total = [&] {
    double t = 0.0;
    for (double v : moments()) t += v;
    return t;
  };
  for (const auto& o : plan.observables) {
    double v = 0.0;
    switch (o.kind) {
      case Kind::energy: v = spectrum.energy(static_cast<std::size_t>(o.a)); break;
      case Kind::d01: v = spectrum.gap(0, 1); break;
      case Kind::d12: v = spectrum.gap(1, 2); break;
      case Kind::moment: v = moments()[static_cast<std::size_t>(o.a)]; break;
      case Kind::m_total: v = total(); break;
      case Kind::k: v = j2_exact(spectrum, o.a, o.b, o.axis).k; break;
      case Kind::j1z:
      case Kind::j1x:
        if (!j1) j1 = j1_components(spectrum);
        v = (o.kind == Kind::j1z ? j1->z : j1->x)[static_cast<std::size_t>(o.a)];
        break;
      case Kind::fidelity: v = fidelity(spectrum.state(0), reference->state(0)); break;
      case Kind::flip: {
        const double t = total();
        v = config.b0 == 0.0 ? (t < -0.5 ? 1.0 : 0.0) : (detect_flip(spectrum, config.b0) == FlipState::flipped);
        break;
      }
      case Kind::ej0:
      case Kind::ez0:
      case Kind::ej1:
      case Kind::ez1:
        if (!dec) dec = gap_decomposition(spec, spectrum);
        v = o.kind == Kind::ej0 ? dec->ej0 : o.kind == Kind::ez0 ? dec->ez0 : o.kind == Kind::ej1 ? dec->ej1 : dec->ez1;
        break;
    }
    out.values.push_back(v);
  }
  return out;
}

}  // namespace

void check_observables(const std::vector<std::string>& names, int n_sites) { make_plan(names, n_sites); }

const ObservableStats& EnsembleStats::get(const std::string& name) const {
  for (const auto& o : observables) {
    if (o.name == name) return o;
  }
  throw ParameterError("observable '" + name + "' not in ensemble");
}

EnsembleStats run_ensemble(const DisorderConfig& config, const std::vector<std::string>& names, unsigned threads) {
  config.validate();
  const Plan plan = make_plan(names, config.n_sites);

  std::optional<Spectrum> reference;
  const bool wants_fidelity = std::any_of(plan.observables.begin(), plan.observables.end(),
                                          [](const Observable& o) { return o.kind == Kind::fidelity; });
  if (wants_fidelity) {
    DisorderConfig clean = config;
    clean.sigma_j = clean.sigma_b = 0.0;
    reference = lowest_k(sample_spec(clean, 0).spec, 1);
  }

  const std::size_t n = config.n_samples;
  std::vector<Evaluated> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = evaluate(config, plan, i, reference ? &*reference : nullptr);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned workers = static_cast<unsigned>(std::clamp<std::size_t>(threads == 0 ? 1 : threads, 1, n));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  EnsembleStats stats;
  stats.config = config;
  for (std::size_t k = 0; k < names.size(); ++k) {
    ObservableStats o;
    o.name = names[k];
    o.values.reserve(n);
    for (const auto& r : results) o.values.push_back(r.values[k]);
    double sum = 0.0;
    for (double v : o.values) sum += v;
    o.mean = sum / static_cast<double>(n);
    if (n > 1) {
      double ss = 0.0;
      for (double v : o.values) ss += (v - o.mean) * (v - o.mean);
      o.std = std::sqrt(ss / static_cast<double>(n - 1));
    }
    stats.observables.push_back(std::move(o));
  }
  for (const auto& r : results) stats.resample_count += static_cast<std::size_t>(r.redraws);
  return stats;
}

std::string ensemble_to_csv(const EnsembleStats& stats) {
  std::vector<std::string> header{"sample_index"};
  for (const auto& o : stats.observables) header.push_back(o.name);
  CsvWriter csv(header);
  const std::size_t n = stats.observables.empty() ? 0 : stats.observables.front().values.size();
  std::vector<std::string> row(header.size());
  for (std::size_t i = 0; i < n; ++i) {
    row[0] = std::to_string(i);
    for (std::size_t k = 0; k < stats.observables.size(); ++k) row[k + 1] = format_number(stats.observables[k].values[i]);
    csv.row(row);
  }
  return csv.str();
}

std::string ensemble_summary_json(const EnsembleStats& stats) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json obs = nlohmann::ordered_json::object();
  for (const auto& o : stats.observables) obs[o.name] = {{"mean", round_to_15(o.mean)}, {"std", round_to_15(o.std)}};
  j["observables"] = std::move(obs);
  j["resample_count"] = stats.resample_count;
  j["master_seed"] = stats.config.master_seed;
  j["config"] = to_json(stats.config);
  return j.dump(2) + "\n";
}

double flipped_fraction(const DisorderConfig& config, unsigned threads) {
  if (config.n_sites % 2 == 0) throw UsageError("flip fraction is defined for odd chains");
  return run_ensemble(config, {"flip"}, threads).observables.front().mean;
}

std::vector<FlipGridRow> flip_fraction_grid(const DisorderConfig& base, const std::vector<double>& b0s,
                                            const std::vector<double>& sigma_bs, unsigned threads) {
  std::vector<FlipGridRow> rows;
  for (double b0 : b0s) {
    for (double sb : sigma_bs) {
      DisorderConfig c = base;
      c.b0 = b0;
      c.sigma_b = sb;
      rows.push_back({b0, sb, flipped_fraction(c, threads)});
    }
  }
  return rows;
}

std::string flip_grid_to_csv(const std::vector<FlipGridRow>& rows) {
  CsvWriter csv({"b0", "sigma_B", "fraction"});
  for (const auto& r : rows) csv.row({format_number(r.b0), format_number(r.sigma_b), format_number(r.fraction)});
  return csv.str();
}

HalfNormalCheck halfnormal_gap_check(const DisorderConfig& config, unsigned threads) {
  if (config.b0 != 0.0) throw ParameterError("the half-normal check runs at b0 = 0");
  HalfNormalCheck h{};
  h.empirical = run_ensemble(config, {"d01"}, threads).observables.front().mean;
  // Independent stream: the oracle never touches the chain pipeline.
  Random rng(child_seed(~config.master_seed, 0));
  double sum = 0.0;
  for (std::size_t i = 0; i < config.n_samples; ++i) sum += std::abs(rng.normal(0.0, config.sigma_b));
  h.oracle = sum / static_cast<double>(config.n_samples);
  h.analytic = config.sigma_b * std::sqrt(2.0 / std::numbers::pi);
  h.alt_form = config.sigma_b / std::sqrt(2.0 * std::numbers::pi);
  h.ratio = h.analytic > 0 ? h.empirical / h.analytic : 0.0;
  return h;
}

std::vector<GapSweepRow> gap_vs_b0(const DisorderConfig& base, const std::vector<double>& b0s, unsigned threads) {
  auto mean_gap = [&](double b0) {
    DisorderConfig c = base;
    c.b0 = b0;
    return run_ensemble(c, {"d01"}, threads).observables.front().mean;
  };
  const double g0 = mean_gap(0.0);
  std::vector<GapSweepRow> rows;
  for (double b0 : b0s) {
    const double g = b0 == 0.0 ? g0 : mean_gap(b0);
    rows.push_back({b0, g, std::hypot(b0, g0)});
  }
  return rows;
}

SweepParameter sweep_parameter_from_string(const std::string& s) {
  if (s == "sigma_J") return SweepParameter::sigma_j;
  if (s == "sigma_B") return SweepParameter::sigma_b;
  throw ConfigError("sweep parameter must be 'sigma_J' or 'sigma_B', got '" + s + "'");
}

const char* to_string(SweepParameter p) noexcept { return p == SweepParameter::sigma_j ? "sigma_J" : "sigma_B"; }

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("line fit needs two or more points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw ParameterError("line fit over a degenerate grid");
  LineFit f{};
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    ss_res += r * r;
  }
  f.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

SensitivityTable sensitivity_sweep(const DisorderConfig& base, SweepParameter parameter,
                                   const std::vector<double>& grid, const std::vector<std::string>& observables,
                                   unsigned threads) {
  std::vector<double> distinct = grid;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 4) throw ParameterError("sensitivity sweep needs at least four distinct grid points");

  SensitivityTable t;
  t.parameter = parameter;
  t.grid = grid;
  for (const auto& name : observables) t.rows.push_back({name, {}, {}, 0, 0, 0});
  for (double g : grid) {
    DisorderConfig c = base;
    (parameter == SweepParameter::sigma_j ? c.sigma_j : c.sigma_b) = g;
    const auto stats = run_ensemble(c, observables, threads);
    t.resample_count += stats.resample_count;
    for (std::size_t k = 0; k < observables.size(); ++k) {
      t.rows[k].stds.push_back(stats.observables[k].std);
      t.rows[k].means.push_back(stats.observables[k].mean);
    }
  }
  for (auto& r : t.rows) {
    const LineFit f = fit_line(t.grid, r.stds);
    r.slope = f.slope;
    r.intercept = f.intercept;
    r.r2 = f.r2;
  }
  return t;
}

std::string sensitivity_to_csv(const SensitivityTable& t) {
  CsvWriter csv({"observable", "parameter", "value", "mean", "std"});
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < t.grid.size(); ++i) {
      csv.row({r.observable, to_string(t.parameter), format_number(t.grid[i]), format_number(r.means[i]),
               format_number(r.stds[i])});
    }
  }
  return csv.str();
}

std::string sensitivity_to_json(const SensitivityTable& t) {
  nlohmann::ordered_json j;
  j["parameter"] = to_string(t.parameter);
  j["grid"] = round_to_15(t.grid);
  nlohmann::ordered_json rows = nlohmann::ordered_json::object();
  for (const auto& r : t.rows) {
    rows[r.observable] = {{"slope", round_to_15(r.slope)},
                          {"intercept", round_to_15(r.intercept)},
                          {"r2", round_to_15(r.r2)},
                          {"std", round_to_15(r.stds)},
                          {"mean", round_to_15(r.means)}};
  }
  j["observables"] = std::move(rows);
  j["resample_count"] = t.resample_count;
  return j.dump(2) + "\n";
}

}  // namespace spinbus
