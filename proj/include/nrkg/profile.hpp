#pragma once

// Schrodinger profiles of the modulated expansion.
//
//   v:  2i v_t - Lap v + 3|v|^2 v = 0,             v(0) = (u0 - i u1) / 2
//   w:  2i w_t - Lap w + v_tt + 3(|v|^4 v / 8 + v^2 conj(w) + 2|v|^2 w) = 0
//
// Both are advanced by Strang splitting around the exact free flow
// e^{i|xi|^2 t/2}. For v the remaining flow is the exact phase rotation
// v -> e^{(3i/2)|v|^2 t} v; for w it is a pointwise real-linear ODE in
// (w, conj w) handled with classical RK4, with v re-integrated alongside.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nrkg/errors.hpp"
#include "nrkg/spectral.hpp"

namespace nrkg {

struct ProfileTrajectory {
  GridPtr grid;
  std::vector<double> sample_times;
  std::vector<SpectralField> v_samples;
  std::vector<SpectralField> w_samples;  // empty unless w was solved
  double dt_v = 0.0;
  double dt_w = 0.0;

  bool has_w() const noexcept { return !w_samples.empty(); }
  std::size_t size() const noexcept { return sample_times.size(); }
};

namespace detail {

inline void check_sample_times(std::span<const double> times) {
  if (times.empty()) throw ConfigError("sample times must not be empty");
  if (times.front() != 0.0) throw ConfigError("sample times must start at 0");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw ConfigError("sample times must be strictly increasing");
  }
}

/// Number of steps of size dt in each sample interval; throws when dt does
/// not divide an interval (relative slack 1e-9).
inline std::vector<std::size_t> steps_per_interval(std::span<const double> times, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
  std::vector<std::size_t> steps;
  steps.reserve(times.size());
  steps.push_back(0);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double ratio = (times[i] - times[i - 1]) / dt;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, n)) {
      throw ConfigError("time step " + std::to_string(dt) + " does not divide sample interval [" +
                        std::to_string(times[i - 1]) + ", " + std::to_string(times[i]) + "]");
    }
    steps.push_back(static_cast<std::size_t>(n));
  }
  return steps;
}

inline void require_real(const SpectralField& u, const char* name) {
  require(is_real(u, 1e-11), std::string(name) + " must be a real field");
}

}  // namespace detail

/// Default profile step: the largest dt <= min(1e-2, g/8) dividing the
/// smallest sample interval g. Throws ConfigError if it does not also divide
/// the other intervals (pass an explicit step in that case).
inline double default_profile_dt(std::span<const double> sample_times) {
  detail::check_sample_times(sample_times);
  if (sample_times.size() < 2) return 1e-2;
  double gap = sample_times[1] - sample_times[0];
  for (std::size_t i = 2; i < sample_times.size(); ++i) gap = std::min(gap, sample_times[i] - sample_times[i - 1]);
  const double m = std::max(8.0, std::ceil(gap / 1e-2 - 1e-12));
  const double dt = gap / m;
  detail::steps_per_interval(sample_times, dt);
  return dt;
}

/// v0 = (u0 - i u1) / 2.
inline SpectralField v0_from_data(const SpectralField& u0, const SpectralField& u1) {
  u0.check_grid(u1);
  detail::require_real(u0, "u0");
  detail::require_real(u1, "u1");
  SpectralField v(u0.grid_ptr());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * cplx(u0[i].real(), -u1[i].real());
  return v;
}

/// w0 = Lap(v0 - conj v0)/4 - v0^3/4 + conj(v0)^3/8 - (3/4)|v0|^2 (v0 - conj v0).
inline SpectralField w0_from_v0(const SpectralField& v0) {
  SpectralField diff = v0 - conj(v0);
  SpectralField w = laplacian(diff);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const cplx z = v0[i];
    const cplx zb = std::conj(z);
    w[i] = 0.25 * w[i] - 0.25 * z * z * z + 0.125 * zb * zb * zb - 0.75 * std::norm(z) * diff[i];
  }
  return w;
}

/// Time derivative along the NLS flow: v_t = -(i/2)(Lap v - 3|v|^2 v).
inline SpectralField dt_v(const SpectralField& v) {
  SpectralField out = laplacian(v);
  const cplx half_i(0.0, -0.5);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = half_i * (out[i] - 3.0 * std::norm(v[i]) * v[i]);
  return out;
}

/// Second time derivative along the NLS flow, obtained by differentiating
/// dt_v once more: v_tt = -(i/2)(Lap v_t - 3(2|v|^2 v_t + v^2 conj(v_t))).
inline SpectralField dtt_v(const SpectralField& v) {
  const SpectralField a = dt_v(v);
  SpectralField out = laplacian(a);
  const cplx half_i(0.0, -0.5);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const cplx z = v[i];
    const cplx at = a[i];
    out[i] = half_i * (out[i] - 3.0 * (2.0 * std::norm(z) * at + z * z * std::conj(at)));
  }
  return out;
}

/// The w equation's source v_tt + (3/8)|v|^4 v.
inline SpectralField w_forcing(const SpectralField& v) {
  SpectralField f = dtt_v(v);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double m = std::norm(v[i]);
    f[i] += 0.375 * m * m * v[i];
  }
  return f;
}

/// w_t = -(i/2)(Lap w - F) with F = v_tt + 3(|v|^4 v/8 + v^2 conj w + 2|v|^2 w).
inline SpectralField dt_w(const SpectralField& v, const SpectralField& w, bool with_forcing = true) {
  v.check_grid(w);
  SpectralField out = laplacian(w);
  SpectralField src = with_forcing ? w_forcing(v) : SpectralField(v.grid_ptr());
  const cplx half_i(0.0, -0.5);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const cplx z = v[i];
    const cplx coupling = 3.0 * (z * z * std::conj(w[i]) + 2.0 * std::norm(z) * w[i]);
    out[i] = half_i * (out[i] - src[i] - coupling);
  }
  return out;
}

/// Exact free Schrodinger flow e^{i|xi|^2 tau / 2} for a fixed tau.
class FreeSchrodingerFlow {
 public:
  FreeSchrodingerFlow(const GridPtr& grid, double tau)
      : multiplier_(make_multiplier(grid, [tau](const Vec3& xi) { return std::polar(1.0, 0.5 * norm_sq(xi) * tau); })) {}

  void apply(SpectralField& u) const { u = apply_multiplier(u, multiplier_); }

 private:
  Multiplier multiplier_;
};

/// One Strang step of the cubic NLS of size dt.
class NlsStepper {
 public:
  NlsStepper(const GridPtr& grid, double dt) : half_(grid, 0.5 * dt), dt_(dt) {}

  void step(SpectralField& v) const {
    half_.apply(v);
    for (cplx& z : v.values()) z *= std::polar(1.0, 1.5 * std::norm(z) * dt_);
    half_.apply(v);
  }

  double dt() const noexcept { return dt_; }

 private:
  FreeSchrodingerFlow half_;
  double dt_;
};

/// Solves the v equation from v0, sampling at sample_times (starting at 0).
inline ProfileTrajectory solve_v(const SpectralField& v0, std::span<const double> sample_times, double dt) {
  detail::check_sample_times(sample_times);
  const auto steps = detail::steps_per_interval(sample_times, dt);

  ProfileTrajectory traj;
  traj.grid = v0.grid_ptr();
  traj.sample_times.assign(sample_times.begin(), sample_times.end());
  traj.dt_v = dt;
  traj.v_samples.reserve(sample_times.size());
  traj.v_samples.push_back(v0);

  const NlsStepper stepper(v0.grid_ptr(), dt);
  SpectralField v = v0;
  for (std::size_t k = 1; k < steps.size(); ++k) {
    for (std::size_t n = 0; n < steps[k]; ++n) stepper.step(v);
    traj.v_samples.push_back(v);
  }
  return traj;
}

struct WSolverOptions {
  double dt = 0.0;
  /// When false the source v_tt + (3/8)|v|^4 v is dropped, leaving the
  /// real-linear homogeneous problem in w.
  bool with_forcing = true;
};

namespace detail {

// RK4 over one step of w' = (i/2)(F(s) + 3(v^2 conj w + 2|v|^2 w)) with v and
// F given at the step's start, midpoint and end.
inline void reaction_rk4(SpectralField& w, double dt, const SpectralField& v0, const SpectralField& vm,
                         const SpectralField& v1, const SpectralField& f0, const SpectralField& fm,
                         const SpectralField& f1, bool with_forcing) {
  const cplx half_i(0.0, 0.5);
  auto rhs = [&](const SpectralField& v, const SpectralField& f, std::size_t i, cplx wi) {
    const cplx z = v[i];
    const cplx src = with_forcing ? f[i] : cplx(0.0, 0.0);
    return half_i * (src + 3.0 * (z * z * std::conj(wi) + 2.0 * std::norm(z) * wi));
  };
  for (std::size_t i = 0; i < w.size(); ++i) {
    const cplx y = w[i];
    const cplx k1 = rhs(v0, f0, i, y);
    const cplx k2 = rhs(vm, fm, i, y + 0.5 * dt * k1);
    const cplx k3 = rhs(vm, fm, i, y + 0.5 * dt * k2);
    const cplx k4 = rhs(v1, f1, i, y + dt * k3);
    w[i] = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
}

}  // namespace detail

/// Solves the w equation from w0. Only v_traj's initial sample is used: v is
/// re-integrated internally with half steps so that it is available at the
/// RK4 stage times. The returned trajectory carries that internal v next to w.
inline ProfileTrajectory solve_w(const ProfileTrajectory& v_traj, const SpectralField& w0,
                                 std::span<const double> sample_times, const WSolverOptions& opts) {
  detail::require(!v_traj.v_samples.empty(), "v trajectory is empty");
  detail::require(!v_traj.sample_times.empty() && v_traj.sample_times.front() == 0.0,
                  "v trajectory must start at time 0");
  const SpectralField& v_init = v_traj.v_samples.front();
  v_init.check_grid(w0);
  detail::check_sample_times(sample_times);
  const auto steps = detail::steps_per_interval(sample_times, opts.dt);

  ProfileTrajectory traj;
  traj.grid = w0.grid_ptr();
  traj.sample_times.assign(sample_times.begin(), sample_times.end());
  traj.dt_v = 0.5 * opts.dt;
  traj.dt_w = opts.dt;
  traj.v_samples.push_back(v_init);
  traj.w_samples.push_back(w0);

  const FreeSchrodingerFlow half(w0.grid_ptr(), 0.5 * opts.dt);
  const NlsStepper v_half(w0.grid_ptr(), 0.5 * opts.dt);
  const bool forced = opts.with_forcing;
  const auto forcing = [&](const SpectralField& v) { return forced ? w_forcing(v) : SpectralField(v.grid_ptr()); };

  SpectralField v = v_init;
  SpectralField w = w0;
  SpectralField f_start = forcing(v);
  for (std::size_t k = 1; k < steps.size(); ++k) {
    for (std::size_t n = 0; n < steps[k]; ++n) {
      SpectralField vm = v;
      v_half.step(vm);
      SpectralField v_end = vm;
      v_half.step(v_end);
      const SpectralField f_mid = forcing(vm);
      SpectralField f_end = forcing(v_end);

      half.apply(w);
      detail::reaction_rk4(w, opts.dt, v, vm, v_end, f_start, f_mid, f_end, forced);
      half.apply(w);

      v = std::move(v_end);
      f_start = std::move(f_end);
    }
    traj.v_samples.push_back(v);
    traj.w_samples.push_back(w);
  }
  return traj;
}

/// Solves v with step dt_v and w with step dt_w on the same sample times and
/// merges them; the v samples come from solve_v.
inline ProfileTrajectory solve_profiles(const SpectralField& v0, std::span<const double> sample_times, double dt_v,
                                        double dt_w) {
  ProfileTrajectory traj = solve_v(v0, sample_times, dt_v);
  ProfileTrajectory wt = solve_w(traj, w0_from_v0(v0), sample_times, WSolverOptions{dt_w, true});
  traj.w_samples = std::move(wt.w_samples);
  traj.dt_w = dt_w;
  return traj;
}

}  // namespace nrkg
