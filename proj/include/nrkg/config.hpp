#pragma once

// JSON experiment configuration. Every key is optional; unknown keys are
// rejected. Defaults:
//
// {
//   "grid":   {"dim": 1, "points": 256, "half_width": 8.0},
//   "data":   {"family": "gaussian", "A0": 2.0, "alpha": 4.0, "delta0": 0.5,
//              "u1_mode": "zero", "path": ""}          (object or array)
//   "eps":    [0.25, 0.125, 0.0625, 0.03125],
//   "times":  [0.25, 0.5, 1.0, 2.0],
//   "solver": {"kg_dt_ratio": 0.125, "scheme": "kahan_li6",
//              "formulation": "physical", "dt_v": 0, "dt_w": 0,
//              "energy_tolerance": 1e-6, "sobolev_s": 0, "w_growth_limit": 1000},
//   "fits":   [{"name": "...", "abscissa": "eps", "response": "second_order_error_L2",
//               "t": 1.0, "eps": null, "family": null, "expect": [3.5, 4.5]}],
//   "jobs":   0
// }
//
// dt_v = dt_w = 0 selects default_profile_dt; jobs = 0 uses all cores.

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "nrkg/data.hpp"
#include "nrkg/errors.hpp"
#include "nrkg/fit.hpp"
#include "nrkg/io.hpp"
#include "nrkg/sweep.hpp"

namespace nrkg {

struct ExperimentConfig {
  SweepConfig sweep;
  std::vector<FitSpec> fits;
};

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, _] : j.items()) {
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

inline DataSpec parse_data_spec(const nlohmann::json& j, const std::string& where) {
  check_keys(j, {"family", "A0", "alpha", "delta0", "u1_mode", "path"}, where);
  DataSpec d;
  d.family = parse_data_family(get_or<std::string>(j, "family", "gaussian", where));
  d.A0 = get_or(j, "A0", d.A0, where);
  d.alpha = get_or(j, "alpha", d.alpha, where);
  d.delta0 = get_or(j, "delta0", d.delta0, where);
  d.u1_mode = parse_u1_mode(get_or<std::string>(j, "u1_mode", "zero", where));
  d.path = get_or<std::string>(j, "path", "", where);
  d.validate();
  return d;
}

inline FitSpec parse_fit_spec(const nlohmann::json& j, const std::string& where) {
  check_keys(j, {"name", "abscissa", "response", "t", "eps", "family", "expect"}, where);
  FitSpec f;
  f.abscissa = parse_abscissa(get_or<std::string>(j, "abscissa", "eps", where));
  f.response = get_or<std::string>(j, "response", f.response, where);
  if (f.response != "first_order_error_L2" && f.response != "second_order_error_L2" && f.response != "energy_drift") {
    throw ConfigError(where + ".response '" + f.response + "' is not a record column that can be fitted");
  }
  f.name = get_or<std::string>(j, "name", f.response + "_vs_" + to_string(f.abscissa), where);
  if (j.contains("t") && !j["t"].is_null()) f.t = get_or(j, "t", 0.0, where);
  if (j.contains("eps") && !j["eps"].is_null()) f.eps = get_or(j, "eps", 0.0, where);
  if (j.contains("family") && !j["family"].is_null()) f.family = parse_data_family(j["family"].get<std::string>());
  if (j.contains("expect") && !j["expect"].is_null()) {
    const auto e = get_or<std::vector<double>>(j, "expect", {}, where);
    if (e.size() != 2 || !(e[0] <= e[1])) throw ConfigError(where + ".expect must be [low, high]");
    f.expect = std::make_pair(e[0], e[1]);
  }
  return f;
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  detail::check_keys(j, {"grid", "data", "eps", "times", "solver", "fits", "jobs"}, "config");
  ExperimentConfig cfg;
  SweepConfig& s = cfg.sweep;
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    detail::check_keys(g, {"dim", "points", "half_width"}, "grid");
    s.grid.dim = detail::get_or(g, "dim", s.grid.dim, "grid");
    s.grid.points = detail::get_or(g, "points", s.grid.points, "grid");
    s.grid.half_width = detail::get_or(g, "half_width", s.grid.half_width, "grid");
  }
  s.grid.make();  // validates
  if (j.contains("data")) {
    s.data.clear();
    const auto& d = j["data"];
    if (d.is_array()) {
      for (std::size_t i = 0; i < d.size(); ++i) s.data.push_back(detail::parse_data_spec(d[i], "data[" + std::to_string(i) + "]"));
    } else {
      s.data.push_back(detail::parse_data_spec(d, "data"));
    }
    if (s.data.empty()) throw ConfigError("data list is empty");
  }
  s.eps = detail::get_or(j, "eps", s.eps, "config");
  if (s.eps.empty()) throw ConfigError("eps list is empty");
  for (double e : s.eps) {
    if (!(e > 0.0 && e <= 1.0)) throw ConfigError("eps values must lie in (0, 1]");
  }
  s.times = detail::get_or(j, "times", s.times, "config");
  detail::with_origin(s.times);
  if (j.contains("solver")) {
    const auto& o = j["solver"];
    detail::check_keys(o,
                       {"kg_dt_ratio", "scheme", "formulation", "dt_v", "dt_w", "energy_tolerance", "sobolev_s",
                        "w_growth_limit"},
                       "solver");
    SolverConfig& c = s.solver;
    c.kg_dt_ratio = detail::get_or(o, "kg_dt_ratio", c.kg_dt_ratio, "solver");
    c.scheme = parse_kg_scheme(detail::get_or<std::string>(o, "scheme", to_string(c.scheme), "solver"));
    c.formulation = parse_formulation(detail::get_or<std::string>(o, "formulation", to_string(c.formulation), "solver"));
    c.dt_v = detail::get_or(o, "dt_v", c.dt_v, "solver");
    c.dt_w = detail::get_or(o, "dt_w", c.dt_w, "solver");
    c.energy_tolerance = detail::get_or(o, "energy_tolerance", c.energy_tolerance, "solver");
    c.sobolev_s = detail::get_or(o, "sobolev_s", c.sobolev_s, "solver");
    c.w_growth_limit = detail::get_or(o, "w_growth_limit", c.w_growth_limit, "solver");
    if (!(c.kg_dt_ratio > 0.0 && c.kg_dt_ratio <= 0.25)) throw ConfigError("solver.kg_dt_ratio must lie in (0, 1/4]");
    if (c.dt_v < 0.0 || c.dt_w < 0.0) throw ConfigError("profile steps must be nonnegative");
    if (!(c.energy_tolerance > 0.0)) throw ConfigError("solver.energy_tolerance must be positive");
  }
  if (j.contains("fits")) {
    const auto& f = j["fits"];
    if (!f.is_array()) throw ConfigError("fits must be an array");
    for (std::size_t i = 0; i < f.size(); ++i) cfg.fits.push_back(detail::parse_fit_spec(f[i], "fits[" + std::to_string(i) + "]"));
  }
  const int jobs = detail::get_or(j, "jobs", 0, "config");
  if (jobs < 0) throw ConfigError("jobs must be nonnegative");
  s.jobs = static_cast<unsigned>(jobs);
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = detail::read_text(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    return parse_config(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace nrkg
