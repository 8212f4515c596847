#include "core/scaling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "core/effective.hpp"
#include "core/eigensolver.hpp"
#include "core/errors.hpp"
#include "core/format.hpp"

namespace spinbus {

namespace {

ScalingRow solve_row(int n, Boundary boundary) {
  const SpinSystemSpec spec = boundary == Boundary::ring ? uniform_ring(n) : uniform_chain(n);
  const int up = minimal_sz_sector(n);
  // Rings can have degenerate ground states inside one sector; ask for more
  // levels so the first level above the manifold is present.
  const std::size_t k = boundary == Boundary::ring ? 4 : 2;
  const int sectors[] = {up};
  const Spectrum s = lowest_k(spec, k, sectors);

  ScalingRow row{};
  row.n_sites = n;
  row.boundary = boundary;
  row.e0 = s.energy(0);
  row.n_bonds = static_cast<int>(spec.bonds().size());
  row.e0_per_bond = row.e0 / row.n_bonds;
  row.gap = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s.energy(i) - row.e0 > kDegeneracyTolerance) {
      row.gap = s.energy(i) - row.e0;
      break;
    }
  }
  if (boundary == Boundary::open && n % 2 == 1) row.m_end = local_moments(s, 0)[static_cast<std::size_t>(n - 1)];
  return row;
}

std::vector<ScalingRow> solve_rows(const std::vector<std::pair<int, Boundary>>& jobs, unsigned threads) {
  std::vector<ScalingRow> rows(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        rows[i] = solve_row(jobs[i].first, jobs[i].second);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto workers = static_cast<unsigned>(std::clamp<std::size_t>(threads == 0 ? 1 : threads, 1, std::max<std::size_t>(jobs.size(), 1)));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

void check_range(int n_min, int n_max, Boundary boundary) {
  const int floor = boundary == Boundary::ring ? 3 : 2;
  if (n_min < floor) throw ParameterError("N_min must be at least " + std::to_string(floor));
  if (n_max > kScalingMaxSites) {
    throw ParameterError("N_max = " + std::to_string(n_max) + " exceeds the limit of " +
                         std::to_string(kScalingMaxSites));
  }
  if (n_max < n_min) throw ParameterError("N_max is below N_min");
}

}  // namespace

std::vector<ScalingRow> scaling_rows(int n_min, int n_max, Boundary boundary, unsigned threads) {
  check_range(n_min, n_max, boundary);
  std::vector<std::pair<int, Boundary>> jobs;
  // Largest first so the slowest job does not start last.
  for (int n = n_max; n >= n_min; --n) jobs.emplace_back(n, boundary);
  auto rows = solve_rows(jobs, threads);
  std::reverse(rows.begin(), rows.end());
  return rows;
}

std::vector<ScalingRow> energy_per_bond_sweep(int n_min, int n_max, Boundary boundary, unsigned threads) {
  return scaling_rows(n_min, n_max, boundary, threads);
}

GapFit fit_gap(const std::vector<ScalingRow>& rows, int n_min, int n_max) {
  double num = 0.0, den = 0.0;
  std::vector<const ScalingRow*> used;
  for (const auto& r : rows) {
    if (r.n_sites < n_min || r.n_sites > n_max) continue;
    const double x = 1.0 / r.n_sites;
    num += x * r.gap;
    den += x * x;
    used.push_back(&r);
  }
  if (used.empty()) throw ParameterError("no rows inside the gap fit range");
  GapFit f{num / den, 0.0, n_min, n_max};
  double ss = 0.0;
  for (const auto* r : used) {
    const double d = r->gap - f.c / r->n_sites;
    ss += d * d;
  }
  f.rms = std::sqrt(ss / static_cast<double>(used.size()));
  return f;
}

MomentFit fit_end_moment(const std::vector<ScalingRow>& rows, int n_min, int n_max) {
  std::vector<double> x, y;
  MomentFit f{};
  for (const auto& r : rows) {
    if (!r.m_end || r.n_sites < n_min || r.n_sites > n_max) continue;
    if (!(*r.m_end > 0)) throw ParameterError("end moment must be positive for a log-log fit");
    x.push_back(std::log(r.n_sites));
    y.push_back(std::log(*r.m_end));
    f.n_values.push_back(r.n_sites);
  }
  const LineFit lf = fit_line(x, y);
  f.slope = lf.slope;
  f.intercept = lf.intercept;
  return f;
}

std::pair<std::vector<ScalingRow>, GapFit> gap_sweep(int n_min, int n_max, unsigned threads) {
  auto rows = scaling_rows(n_min, n_max, Boundary::open, threads);
  const GapFit fit = fit_gap(rows, n_min, n_max);
  return {std::move(rows), fit};
}

std::pair<std::vector<ScalingRow>, MomentFit> end_moment_sweep(const std::vector<int>& odd_n, unsigned threads) {
  if (odd_n.empty()) throw ParameterError("empty N list");
  std::vector<std::pair<int, Boundary>> jobs;
  for (int n : odd_n) {
    if (n % 2 == 0) throw ParameterError("end-moment sweep takes odd N only, got " + std::to_string(n));
    check_range(n, n, Boundary::open);
    jobs.emplace_back(n, Boundary::open);
  }
  std::sort(jobs.begin(), jobs.end());
  jobs.erase(std::unique(jobs.begin(), jobs.end()), jobs.end());
  auto rows = solve_rows(jobs, threads);
  const MomentFit fit = fit_end_moment(rows, rows.front().n_sites, rows.back().n_sites);
  return {std::move(rows), fit};
}

std::string scaling_to_csv(const std::vector<ScalingRow>& rows) {
  CsvWriter csv({"N", "boundary", "E0", "E0_per_bond", "gap", "m_end"});
  for (const auto& r : rows) {
    csv.row({std::to_string(r.n_sites), to_string(r.boundary), format_number(r.e0), format_number(r.e0_per_bond),
             format_number(r.gap), r.m_end ? format_number(*r.m_end) : std::string{}});
  }
  return csv.str();
}

}  // namespace spinbus
