#pragma once

// Experiment orchestration: one case = (data spec, eps) solved over a list of
// sample times; a sweep runs the data x eps matrix on a worker pool.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "nrkg/data.hpp"
#include "nrkg/errors.hpp"
#include "nrkg/expansion.hpp"
#include "nrkg/fit.hpp"
#include "nrkg/klein_gordon.hpp"
#include "nrkg/profile.hpp"
#include "nrkg/spectral.hpp"

namespace nrkg {

struct GridSpec {
  int dim = 1;
  std::size_t points = 256;
  double half_width = 8.0;

  GridPtr make() const { return make_grid(dim, points, half_width); }
};

struct SolverConfig {
  double kg_dt_ratio = 0.125;  ///< KG step = ratio * eps^2 (physical time)
  KGScheme scheme = KGScheme::kahan_li6;
  Formulation formulation = Formulation::physical;
  double dt_v = 0.0;  ///< 0 selects default_profile_dt
  double dt_w = 0.0;  ///< 0 selects default_profile_dt
  double energy_tolerance = 1e-6;
  double sobolev_s = 0.0;
  double w_growth_limit = 1e3;
};

enum class RecordStatus { ok, energy_breach, config_error, failure };

inline std::string to_string(RecordStatus s) {
  switch (s) {
    case RecordStatus::ok: return "ok";
    case RecordStatus::energy_breach: return "energy_breach";
    case RecordStatus::config_error: return "config_error";
    case RecordStatus::failure: return "failure";
  }
  return "?";
}

inline RecordStatus parse_record_status(const std::string& s) {
  if (s == "ok") return RecordStatus::ok;
  if (s == "energy_breach") return RecordStatus::energy_breach;
  if (s == "config_error") return RecordStatus::config_error;
  if (s == "failure") return RecordStatus::failure;
  throw ConfigError("unknown record status '" + s + "'");
}

struct SweepRecord {
  double eps = 0.0;
  double t = 0.0;
  DataSpec data;
  GridSpec grid;
  Formulation formulation = Formulation::physical;
  KGScheme scheme = KGScheme::kahan_li6;
  double dt_kg = 0.0;  ///< physical time units
  double dt_v = 0.0;
  double dt_w = 0.0;
  double first_order_error_L2 = 0.0;
  double second_order_error_L2 = 0.0;
  double energy_drift = 0.0;  ///< |E(t) - E(0)| / E(0)
  double w_h2_growth = 0.0;   ///< |w(t)|_{H^2} / |w(0)|_{H^2}
  bool w_growth_flag = false;
  RecordStatus status = RecordStatus::ok;
  std::string diagnostic;
  double wall_time_s = 0.0;  ///< not serialized to CSV

  bool valid() const noexcept { return status == RecordStatus::ok; }

  friend bool operator==(const SweepRecord& a, const SweepRecord& b) {
    const auto key = [](const SweepRecord& r) {
      return std::tie(r.eps, r.t, r.data.family, r.data.A0, r.data.alpha, r.data.delta0, r.data.u1_mode, r.data.path,
                      r.grid.dim, r.grid.points, r.grid.half_width, r.formulation, r.scheme, r.dt_kg, r.dt_v, r.dt_w,
                      r.first_order_error_L2, r.second_order_error_L2, r.energy_drift, r.w_h2_growth,
                      r.w_growth_flag, r.status, r.diagnostic);
    };
    return key(a) == key(b);
  }
};

/// Total order used to sort sweep output: data, then eps descending, then t.
inline bool record_key_less(const SweepRecord& a, const SweepRecord& b) {
  const auto key = [](const SweepRecord& r) {
    return std::make_tuple(static_cast<int>(r.data.family), r.data.A0, r.data.alpha, r.data.delta0,
                           static_cast<int>(r.data.u1_mode), r.data.path, -r.eps, r.t);
  };
  return key(a) < key(b);
}

struct CaseResult {
  std::vector<SweepRecord> records;
  std::vector<KGState> kg_states;     ///< at 0 and every requested time
  ProfileTrajectory profiles;         ///< same sample times
  std::vector<double> energies;       ///< E at the same times
};

namespace detail {

inline std::vector<double> with_origin(const std::vector<double>& times) {
  if (times.empty()) throw ConfigError("sample time list is empty");
  std::vector<double> out = times;
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) throw ConfigError("sample times must be distinct");
  if (out.front() < 0.0) throw ConfigError("sample times must be nonnegative");
  if (out.front() != 0.0) out.insert(out.begin(), 0.0);
  return out;
}

inline double relative_drift(double e0, double e) {
  if (e0 == 0.0) return std::abs(e);
  return std::abs(e - e0) / std::abs(e0);
}

}  // namespace detail

/// Runs one case with full state retained. Errors propagate as exceptions.
inline CaseResult run_case_full(const DataSpec& data, double eps, const std::vector<double>& times,
                                const GridSpec& grid_spec, const SolverConfig& solver) {
  detail::check_eps(eps);
  data.validate();
  if (!(solver.kg_dt_ratio > 0.0)) throw ConfigError("kg_dt_ratio must be positive");
  const std::vector<double> all = detail::with_origin(times);
  const GridPtr grid = grid_spec.make();

  KGOptions kg;
  kg.scheme = solver.scheme;
  kg.formulation = solver.formulation;
  const double dt_phys = solver.kg_dt_ratio * eps * eps;

  const InitialData init = make_initial_data(data, grid);
  CaseResult res;
  if (solver.formulation == Formulation::physical) {
    kg.dt = dt_phys;
    res.kg_states = kg_solve(init.u0, init.u1, eps, all, kg);
  } else {
    kg.dt = solver.kg_dt_ratio;
    const GridPtr sg = scaled_grid(*grid, eps);
    const InitialData sdata = make_scaled_initial_data(data, sg, eps);
    for (const KGState& s : kg_solve(sdata.u0, sdata.u1, eps, all, kg)) res.kg_states.push_back(unscale(s, grid));
    for (std::size_t k = 0; k < all.size(); ++k) res.kg_states[k].time = all[k];
  }

  const double dt_v = solver.dt_v > 0.0 ? solver.dt_v : default_profile_dt(all);
  const double dt_w = solver.dt_w > 0.0 ? solver.dt_w : default_profile_dt(all);
  res.profiles = solve_profiles(init.v0, all, dt_v, dt_w);

  for (const KGState& s : res.kg_states) res.energies.push_back(energy(s));
  const double w0_h2 = sobolev_norm(res.profiles.w_samples.front(), 2.0);

  for (std::size_t k = 0; k < all.size(); ++k) {
    if (std::find(times.begin(), times.end(), all[k]) == times.end()) continue;
    SweepRecord r;
    r.eps = eps;
    r.t = all[k];
    r.data = data;
    r.grid = grid_spec;
    r.formulation = solver.formulation;
    r.scheme = solver.scheme;
    r.dt_kg = dt_phys;
    r.dt_v = dt_v;
    r.dt_w = dt_w;
    const auto err = expansion_errors(res.kg_states[k], res.profiles.v_samples[k], res.profiles.w_samples[k],
                                      all[k], solver.sobolev_s);
    r.first_order_error_L2 = err.first_order;
    r.second_order_error_L2 = err.second_order;
    r.energy_drift = detail::relative_drift(res.energies.front(), res.energies[k]);
    const double wh2 = sobolev_norm(res.profiles.w_samples[k], 2.0);
    r.w_h2_growth = w0_h2 > 0.0 ? wh2 / w0_h2 : (wh2 > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    r.w_growth_flag = r.w_h2_growth > solver.w_growth_limit;
    if (!std::isfinite(r.first_order_error_L2) || !std::isfinite(r.second_order_error_L2) ||
        !std::isfinite(r.energy_drift)) {
      r.status = RecordStatus::failure;
      r.diagnostic = "non-finite error or energy value";
    } else if (r.energy_drift > solver.energy_tolerance) {
      r.status = RecordStatus::energy_breach;
      r.diagnostic = "energy drift exceeds tolerance " + std::to_string(solver.energy_tolerance);
    }
    res.records.push_back(std::move(r));
  }
  return res;
}

/// One record per requested time. Any component error turns into records
/// carrying the diagnostic (status config_error or failure, zero errors).
inline std::vector<SweepRecord> run_case(const DataSpec& data, double eps, const std::vector<double>& times,
                                         const GridSpec& grid_spec, const SolverConfig& solver) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<SweepRecord> out;
  const auto diagnostic_records = [&](RecordStatus status, const std::string& what) {
    std::vector<SweepRecord> recs;
    std::vector<double> ts = times;
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    for (double t : ts) {
      SweepRecord r;
      r.eps = eps;
      r.t = t;
      r.data = data;
      r.grid = grid_spec;
      r.formulation = solver.formulation;
      r.scheme = solver.scheme;
      r.dt_kg = solver.kg_dt_ratio * eps * eps;
      r.dt_v = solver.dt_v;
      r.dt_w = solver.dt_w;
      r.status = status;
      r.diagnostic = what;
      recs.push_back(std::move(r));
    }
    return recs;
  };
  try {
    out = run_case_full(data, eps, times, grid_spec, solver).records;
  } catch (const ConfigError& e) {
    out = diagnostic_records(RecordStatus::config_error, e.what());
  } catch (const std::exception& e) {
    out = diagnostic_records(RecordStatus::failure, e.what());
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (auto& r : out) r.wall_time_s = wall;
  return out;
}

struct SweepConfig {
  GridSpec grid;
  std::vector<DataSpec> data{DataSpec{}};
  std::vector<double> eps{0.25, 0.125, 0.0625, 0.03125};
  std::vector<double> times{0.25, 0.5, 1.0, 2.0};
  SolverConfig solver;
  unsigned jobs = 0;  ///< 0 selects std::thread::hardware_concurrency()
};

struct SweepProgress {
  std::size_t done = 0;
  std::size_t total = 0;
  const DataSpec* data = nullptr;
  double eps = 0.0;
  double wall_time_s = 0.0;
};

using ProgressFn = std::function<void(const SweepProgress&)>;

/// Runs every (data, eps) case. Records are sorted with record_key_less, so
/// the output does not depend on the number of workers. The progress
/// callback is serialized.
inline std::vector<SweepRecord> run_sweep(const SweepConfig& cfg, const ProgressFn& progress = {}) {
  struct Case {
    const DataSpec* data;
    double eps;
  };
  std::vector<Case> cases;
  for (const auto& d : cfg.data) {
    for (double e : cfg.eps) cases.push_back({&d, e});
  }
  if (cases.empty()) throw ConfigError("sweep has no cases (empty data or eps list)");

  std::vector<std::vector<SweepRecord>> results(cases.size());
  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  std::size_t done = 0;
  const auto worker = [&] {
    for (std::size_t i = next++; i < cases.size(); i = next++) {
      results[i] = run_case(*cases[i].data, cases[i].eps, cfg.times, cfg.grid, cfg.solver);
      std::lock_guard lock(progress_mutex);
      ++done;
      if (progress) {
        progress({done, cases.size(), cases[i].data, cases[i].eps,
                  results[i].empty() ? 0.0 : results[i].front().wall_time_s});
      }
    }
  };
  unsigned jobs = cfg.jobs ? cfg.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, cases.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
  }
  std::vector<SweepRecord> all;
  for (auto& rs : results) all.insert(all.end(), rs.begin(), rs.end());
  std::stable_sort(all.begin(), all.end(), record_key_less);
  return all;
}

/// Which records a fit uses and how. Only valid records enter a fit.
struct FitSpec {
  std::string name;
  Abscissa abscissa = Abscissa::eps;
  std::string response = "second_order_error_L2";
  std::optional<double> t;                ///< keep only this sample time
  std::optional<double> eps;              ///< keep only this eps
  std::optional<DataFamily> family;       ///< keep only this family
  std::optional<std::pair<double, double>> expect;  ///< reported, never enforced here
};

inline double record_response(const SweepRecord& r, const std::string& response) {
  if (response == "first_order_error_L2") return r.first_order_error_L2;
  if (response == "second_order_error_L2") return r.second_order_error_L2;
  if (response == "energy_drift") return r.energy_drift;
  throw ConfigError("unknown fit response '" + response +
                    "' (expected first_order_error_L2, second_order_error_L2 or energy_drift)");
}

inline bool fit_selects(const FitSpec& spec, const SweepRecord& r) {
  if (!r.valid()) return false;
  if (spec.t && std::abs(r.t - *spec.t) > 1e-12 * std::max(1.0, std::abs(*spec.t))) return false;
  if (spec.eps && std::abs(r.eps - *spec.eps) > 1e-12 * std::abs(*spec.eps)) return false;
  if (spec.family && r.data.family != *spec.family) return false;
  return true;
}

inline FitResult apply_fit(const std::vector<SweepRecord>& records, const FitSpec& spec) {
  std::vector<FitPoint> pts;
  for (const auto& r : records) {
    if (fit_selects(spec, r)) pts.push_back({r.eps, r.t, record_response(r, spec.response)});
  }
  return fit_order(pts, spec.abscissa, spec.response);
}

}  // namespace nrkg
