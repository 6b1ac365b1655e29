#pragma once

// Least-squares slopes on log-log data: log(y) = intercept + slope * log(x).

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include "nrkg/errors.hpp"

namespace nrkg {

enum class Abscissa { eps, eps2_t, t };

inline std::string to_string(Abscissa a) {
  switch (a) {
    case Abscissa::eps: return "eps";
    case Abscissa::eps2_t: return "eps2_t";
    case Abscissa::t: return "t";
  }
  return "?";
}

inline Abscissa parse_abscissa(const std::string& s) {
  if (s == "eps") return Abscissa::eps;
  if (s == "eps2_t") return Abscissa::eps2_t;
  if (s == "t") return Abscissa::t;
  throw ConfigError("unknown abscissa '" + s + "' (expected eps, eps2_t or t)");
}

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  Abscissa abscissa = Abscissa::eps;
  std::string response;
  std::size_t points = 0;
  std::size_t dropped = 0;
};

/// Plain least squares on (log x, log y). Needs at least min_points pairs;
/// all values must be positive and finite.
inline FitResult fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys, std::size_t min_points = 2) {
  if (xs.size() != ys.size()) throw FitError("abscissa and response lengths differ");
  if (xs.size() < std::max<std::size_t>(min_points, 2)) {
    throw FitError("need at least " + std::to_string(std::max<std::size_t>(min_points, 2)) + " points, got " +
                   std::to_string(xs.size()));
  }
  const std::size_t n = xs.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0) || !std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      throw FitError("log-log fit needs positive finite data");
    }
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw FitError("abscissa values are all equal");
  FitResult f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  f.points = n;
  return f;
}

/// One (abscissa inputs, response) observation for fit_order.
struct FitPoint {
  double eps = 0.0;
  double t = 0.0;
  double response = 0.0;
};

inline double abscissa_value(Abscissa a, double eps, double t) {
  switch (a) {
    case Abscissa::eps: return eps;
    case Abscissa::eps2_t: return eps * eps * t;
    case Abscissa::t: return t;
  }
  return 0.0;
}

/// Drops points with nonpositive or non-finite response (warning on
/// std::clog) and fits the survivors; fewer than 3 survivors is a FitError.
inline FitResult fit_order(const std::vector<FitPoint>& points, Abscissa abscissa, const std::string& response_name) {
  std::vector<double> xs, ys;
  std::size_t dropped = 0;
  for (const auto& p : points) {
    const double x = abscissa_value(abscissa, p.eps, p.t);
    if (!(p.response > 0.0) || !std::isfinite(p.response) || !(x > 0.0)) {
      std::clog << "warning: dropping record eps=" << p.eps << " t=" << p.t << " with " << response_name << "="
                << p.response << " from " << to_string(abscissa) << " fit\n";
      ++dropped;
      continue;
    }
    xs.push_back(x);
    ys.push_back(p.response);
  }
  if (xs.size() < 3) {
    throw FitError("fit of " + response_name + " vs " + to_string(abscissa) + " needs at least 3 usable records, got " +
                   std::to_string(xs.size()));
  }
  FitResult f = fit_loglog(xs, ys, 3);
  f.abscissa = abscissa;
  f.response = response_name;
  f.dropped = dropped;
  return f;
}

}  // namespace nrkg
