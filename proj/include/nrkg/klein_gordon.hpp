#pragma once

// Cubic nonlinear Klein-Gordon equation in the non-relativistic scaling
//
//   eps^2 u_tt - Lap u + eps^{-2} u = -|u|^2 u,  u(0) = u0,  u_t(0) = u1 / eps^2,
//
// and its eps-free form U_tt - Lap U + U = -|U|^2 U obtained with
// (S_eps g)(t, x) = eps g(eps^2 t, eps x).
//
// Time stepping is a trigonometric splitting: every Fourier mode's linear
// oscillator is rotated exactly with omega(xi) = <eps xi> / eps^2 (scaled:
// <xi>), and the nonlinearity enters as velocity kicks. The basic
// kick-rotate-kick step is optionally composed into a 4th or 6th order
// symmetric scheme; all substeps stay exact flows, so negative substeps are
// fine.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nrkg/errors.hpp"
#include "nrkg/profile.hpp"
#include "nrkg/spectral.hpp"

namespace nrkg {

enum class Formulation { physical, scaled };

enum class KGScheme {
  strang,     ///< kick-rotate-kick (impulse / Deuflhard), order 2
  suzuki4,    ///< five-stage symmetric composition, order 4
  kahan_li6,  ///< nine-stage symmetric composition, order 6
};

inline std::string to_string(Formulation f) { return f == Formulation::physical ? "physical" : "scaled"; }

inline std::string to_string(KGScheme s) {
  switch (s) {
    case KGScheme::strang: return "strang";
    case KGScheme::suzuki4: return "suzuki4";
    case KGScheme::kahan_li6: return "kahan_li6";
  }
  return "?";
}

inline KGScheme parse_kg_scheme(const std::string& s) {
  if (s == "strang") return KGScheme::strang;
  if (s == "suzuki4") return KGScheme::suzuki4;
  if (s == "kahan_li6") return KGScheme::kahan_li6;
  throw ConfigError("unknown KG scheme '" + s + "' (expected strang, suzuki4 or kahan_li6)");
}

inline Formulation parse_formulation(const std::string& s) {
  if (s == "physical") return Formulation::physical;
  if (s == "scaled") return Formulation::scaled;
  throw ConfigError("unknown formulation '" + s + "' (expected physical or scaled)");
}

/// Composition weights of the basic step (they sum to one).
inline std::vector<double> composition_weights(KGScheme scheme) {
  switch (scheme) {
    case KGScheme::strang: return {1.0};
    case KGScheme::suzuki4: {
      const double s = 1.0 / (4.0 - std::cbrt(4.0));
      return {s, s, 1.0 - 4.0 * s, s, s};
    }
    case KGScheme::kahan_li6: {
      // Kahan & Li (1997), s9odr6a. The centre weight is fixed by
      // consistency so that the weights sum to one exactly.
      const std::array<double, 4> g{0.39216144400731413928, 0.33259913678935943860, -0.70624617255763935981,
                                    0.082213596293550800230};
      const double mid = 1.0 - 2.0 * (g[0] + g[1] + g[2] + g[3]);
      return {g[0], g[1], g[2], g[3], mid, g[3], g[2], g[1], g[0]};
    }
  }
  return {1.0};
}

struct KGOptions {
  /// Step in the formulation's own time unit (physical t, or scaled t/eps^2).
  double dt = 0.0;
  bool nonlinearity_enabled = true;
  Formulation formulation = Formulation::physical;
  KGScheme scheme = KGScheme::kahan_li6;

  /// dt = eps^2 / 8 in physical time.
  static KGOptions physical_default(double eps) {
    KGOptions o;
    o.dt = eps * eps / 8.0;
    return o;
  }

  /// dt = 1/8 in scaled time (the same step as physical_default).
  static KGOptions scaled_default() {
    KGOptions o;
    o.dt = 0.125;
    o.formulation = Formulation::scaled;
    return o;
  }
};

struct KGState {
  SpectralField u;
  SpectralField ut;
  double time = 0.0;  ///< in the formulation's own time unit
  double eps = 1.0;
  Formulation formulation = Formulation::physical;
};

/// Largest admissible step: eps^2/4 (physical) or 1/4 (scaled).
inline double max_kg_dt(double eps, Formulation f) { return f == Formulation::physical ? 0.25 * eps * eps : 0.25; }

namespace detail {

inline void check_eps(double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("eps must lie in (0, 1] (got " + std::to_string(eps) + ")");
}

inline void check_kg_dt(double eps, const KGOptions& opts) {
  const double bound = max_kg_dt(eps, opts.formulation);
  if (!(opts.dt > 0.0)) throw ConfigError("KG time step must be positive");
  if (opts.dt > bound * (1.0 + 1e-12)) {
    throw ConfigError("KG time step " + std::to_string(opts.dt) + " exceeds the oscillation-resolving bound " +
                      std::to_string(bound) + " for the " + to_string(opts.formulation) + " formulation");
  }
}

}  // namespace detail

/// Per-mode oscillator frequency.
inline double kg_frequency(const Vec3& xi, double eps, Formulation f) {
  if (f == Formulation::scaled) return std::sqrt(1.0 + norm_sq(xi));
  return std::sqrt(1.0 + eps * eps * norm_sq(xi)) / (eps * eps);
}

/// Reusable stepper for a fixed grid, eps and options. Works on Fourier
/// coefficients so each basic step costs two transforms.
class KGPropagator {
 public:
  KGPropagator(GridPtr grid, double eps, const KGOptions& opts)
      : grid_(std::move(grid)), opts_(opts), weights_(composition_weights(opts.scheme)) {
    detail::check_eps(eps);
    detail::check_kg_dt(eps, opts);
    kick_scale_ = opts.formulation == Formulation::physical ? 1.0 / (eps * eps) : 1.0;
    const std::size_t n = grid_->size();
    omega_.resize(n);
    grid_->for_each_mode([&](std::size_t i, const Vec3& xi) { omega_[i] = kg_frequency(xi, eps, opts.formulation); });
    for (double w : weights_) {
      Rotation r;
      r.cos.resize(n);
      r.sin.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        r.cos[i] = std::cos(omega_[i] * w * opts.dt);
        r.sin[i] = std::sin(omega_[i] * w * opts.dt);
      }
      rotations_.push_back(std::move(r));
    }
  }

  const KGOptions& options() const noexcept { return opts_; }

  /// Advances (u_hat, ut_hat) by one full dt. Adjacent half kicks of the
  /// composed basic steps act on the same u and are merged.
  void step_coefficients(std::vector<cplx>& uh, std::vector<cplx>& vh) const {
    const std::size_t stages = weights_.size();
    kick(uh, vh, 0.5 * weights_[0] * opts_.dt);
    for (std::size_t s = 0; s < stages; ++s) {
      rotate(uh, vh, s);
      const double next = s + 1 < stages ? weights_[s + 1] : 0.0;
      kick(uh, vh, 0.5 * (weights_[s] + next) * opts_.dt);
    }
  }

  void step(SpectralField& u, SpectralField& ut, std::size_t count = 1) const {
    auto uh = u.fourier();
    auto vh = ut.fourier();
    for (std::size_t k = 0; k < count; ++k) step_coefficients(uh, vh);
    u = SpectralField::from_fourier(grid_, uh);
    ut = SpectralField::from_fourier(grid_, vh);
  }

 private:
  struct Rotation {
    std::vector<double> cos;
    std::vector<double> sin;
  };

  void kick(const std::vector<cplx>& uh, std::vector<cplx>& vh, double h) const {
    if (!opts_.nonlinearity_enabled) return;
    auto u = inverse_transform(*grid_, uh);
    for (cplx& z : u) z = std::norm(z) * z;
    auto nh = forward_transform(*grid_, u);
    const double c = h * kick_scale_;
    for (std::size_t i = 0; i < vh.size(); ++i) vh[i] -= c * nh[i];
  }

  void rotate(std::vector<cplx>& uh, std::vector<cplx>& vh, std::size_t s) const {
    const Rotation& r = rotations_[s];
    for (std::size_t i = 0; i < uh.size(); ++i) {
      const cplx a = uh[i];
      const cplx b = vh[i];
      uh[i] = r.cos[i] * a + (r.sin[i] / omega_[i]) * b;
      vh[i] = -omega_[i] * r.sin[i] * a + r.cos[i] * b;
    }
  }

  GridPtr grid_;
  KGOptions opts_;
  std::vector<double> weights_;
  double kick_scale_ = 1.0;
  std::vector<double> omega_;
  std::vector<Rotation> rotations_;
};

inline KGState kg_step(const KGState& state, const KGOptions& opts) {
  detail::require(state.formulation == opts.formulation, "state and options use different formulations");
  state.u.check_grid(state.ut);
  const KGPropagator prop(state.u.grid_ptr(), state.eps, opts);
  KGState next = state;
  prop.step(next.u, next.ut);
  next.time = state.time + opts.dt;
  return next;
}

/// Integrates from (u0, u1) and returns the states at sample_times, which are
/// physical times starting at 0. In the physical formulation the initial
/// velocity is u1/eps^2. In the scaled formulation u0, u1 must already be the
/// scaled data U0 = eps u0(eps y), U1 = eps u1(eps y) on the dilated grid; the
/// velocity is U1 itself and the returned times are t/eps^2.
inline std::vector<KGState> kg_solve(const SpectralField& u0, const SpectralField& u1, double eps,
                                     std::span<const double> sample_times, const KGOptions& opts) {
  u0.check_grid(u1);
  detail::require_real(u0, "u0");
  detail::require_real(u1, "u1");
  detail::check_eps(eps);
  detail::check_sample_times(sample_times);

  const bool scaled = opts.formulation == Formulation::scaled;
  const double time_unit = scaled ? 1.0 / (eps * eps) : 1.0;
  std::vector<double> own_times(sample_times.begin(), sample_times.end());
  for (double& t : own_times) t *= time_unit;
  const auto steps = detail::steps_per_interval(own_times, opts.dt);

  const KGPropagator prop(u0.grid_ptr(), eps, opts);
  KGState s{u0, scaled ? u1 : u1 * cplx(1.0 / (eps * eps), 0.0), 0.0, eps, opts.formulation};
  std::vector<KGState> out;
  out.reserve(sample_times.size());
  out.push_back(s);

  auto uh = s.u.fourier();
  auto vh = s.ut.fourier();
  for (std::size_t k = 1; k < steps.size(); ++k) {
    for (std::size_t n = 0; n < steps[k]; ++n) prop.step_coefficients(uh, vh);
    s.u = SpectralField::from_fourier(u0.grid_ptr(), uh);
    s.ut = SpectralField::from_fourier(u0.grid_ptr(), vh);
    s.time = own_times[k];
    out.push_back(s);
  }
  return out;
}

/// Integral of |grad u|^2, evaluated spectrally through Parseval.
inline double dirichlet_energy(const SpectralField& u) {
  const auto c = u.fourier();
  double acc = 0.0;
  u.grid().for_each_mode([&](std::size_t i, const Vec3& xi) { acc += norm_sq(xi) * std::norm(c[i]); });
  const double n = static_cast<double>(u.grid().size());
  return acc * u.grid().volume() / (n * n);
}

/// Physical: int eps^2|u_t|^2 + |grad u|^2 + eps^{-2}|u|^2 + |u|^4/2.
/// Scaled:   int |U_t|^2 + |grad U|^2 + |U|^2 + |U|^4/2.
inline double energy(const KGState& s) {
  const bool phys = s.formulation == Formulation::physical;
  const double a = phys ? s.eps * s.eps : 1.0;
  const double c = phys ? 1.0 / (s.eps * s.eps) : 1.0;
  double pointwise = 0.0;
  for (std::size_t i = 0; i < s.u.size(); ++i) {
    const double m = std::norm(s.u[i]);
    pointwise += a * std::norm(s.ut[i]) + c * m + 0.5 * m * m;
  }
  return pointwise * s.u.grid().cell_volume() + dirichlet_energy(s.u);
}

/// Grid for S_eps-transformed fields: same points, half width L/eps.
inline GridPtr scaled_grid(const Grid& physical, double eps) {
  return make_grid(physical.dim(), physical.points_per_axis(), physical.half_width() / eps);
}

/// Maps a scaled state back to physical variables on the matching physical
/// grid: u = U/eps, u_t = U_t/eps^3, t = eps^2 tau.
inline KGState unscale(const KGState& scaled, const GridPtr& physical) {
  detail::require(scaled.formulation == Formulation::scaled, "unscale expects a scaled-formulation state");
  const Grid& g = scaled.u.grid();
  const double eps = scaled.eps;
  detail::require(g.dim() == physical->dim() && g.points_per_axis() == physical->points_per_axis() &&
                      std::abs(g.half_width() * eps - physical->half_width()) <= 1e-12 * physical->half_width(),
                  "physical grid does not correspond to the scaled grid");
  auto u = scaled.u.values();
  auto ut = scaled.ut.values();
  std::vector<cplx> pu(u.begin(), u.end());
  std::vector<cplx> pv(ut.begin(), ut.end());
  for (auto& z : pu) z /= eps;
  for (auto& z : pv) z /= eps * eps * eps;
  return KGState{SpectralField(physical, std::move(pu)), SpectralField(physical, std::move(pv)),
                 scaled.time * eps * eps, eps, Formulation::physical};
}

/// phi = (d_t + i<D>) <D>^{-1} R for a scaled state (R, R_t), so that
/// Im phi = R and Re <D> phi = R_t.
inline SpectralField wave_decompose(const KGState& s) {
  detail::require(s.formulation == Formulation::scaled, "wave decomposition needs a scaled-formulation state");
  s.u.check_grid(s.ut);
  auto r = s.u.fourier();
  auto rt = s.ut.fourier();
  s.u.grid().for_each_mode([&](std::size_t i, const Vec3& xi) {
    const double b = std::sqrt(1.0 + norm_sq(xi));
    r[i] = rt[i] / b + cplx(0.0, 1.0) * r[i];
  });
  return SpectralField::from_fourier(s.u.grid_ptr(), r);
}

/// Inverse of wave_decompose: returns (Im phi, Re <D> phi).
inline std::pair<SpectralField, SpectralField> wave_reconstruct(const SpectralField& phi) {
  SpectralField r = map_pointwise(phi, [](cplx z) { return cplx(z.imag(), 0.0); });
  SpectralField d = apply_multiplier(phi, symbols::bracket_power(1.0));
  return {std::move(r), real_part(d)};
}

/// Initial velocity of the second-order remainder,
/// -eps^2 [ (1/8) d_t(v^3 + conj v^3)(0) + d_t(w + conj w)(0) ],
/// with both time derivatives taken analytically from the profile equations.
inline SpectralField remainder_initial_velocity(const SpectralField& v0, const SpectralField& w0, double eps) {
  const SpectralField vt = dt_v(v0);
  const SpectralField wt = dt_w(v0, w0);
  SpectralField out(v0.grid_ptr());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const cplx dv3 = 3.0 * v0[i] * v0[i] * vt[i];
    out[i] = -eps * eps * (0.125 * 2.0 * dv3.real() + 2.0 * wt[i].real());
  }
  return out;
}

namespace detail {

// Source H1 + H2 + H3 of the remainder equation and the factor
// S = Phi1 + eps^2 Phi2 used by the self-coupling H_r, at one time.
struct RemainderSource {
  std::vector<double> h;
  std::vector<double> s;
};

inline RemainderSource remainder_source(const SpectralField& v, const SpectralField& w, const SpectralField& wtt,
                                        double t, double eps) {
  const double e2 = eps * eps;
  const double e4 = e2 * e2;
  const double e6 = e4 * e2;
  const cplx e1 = std::polar(1.0, t / e2);
  const cplx e3 = std::polar(1.0, 3.0 * t / e2);
  const cplx e5 = std::polar(1.0, 5.0 * t / e2);

  const SpectralField vt = dt_v(v);
  const SpectralField vtt = dtt_v(v);
  SpectralField v3 = map_pointwise(v, [](cplx z) { return z * z * z; });
  const SpectralField lap_v3 = laplacian(v3);

  RemainderSource out;
  out.h.resize(v.size());
  out.s.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const cplx z = v[i];
    const cplx z2 = z * z;
    const cplx z3 = v3[i];
    const double m = std::norm(z);
    const cplx d_v3 = 3.0 * z2 * vt[i];
    const cplx dd_v3 = 6.0 * z * vt[i] * vt[i] + 3.0 * z2 * vtt[i];

    const cplx h1 = e4 * (0.125 * e3 * dd_v3 + e1 * wtt[i]);
    const cplx h2 = e2 * (0.375 * e5 * z2 * z3 +
                          0.125 * e3 * (cplx(0.0, 6.0) * d_v3 - lap_v3[i] + 3.0 * (2.0 * m * z3 + 8.0 * z2 * w[i])));
    const double phi1 = 2.0 * (e1 * z).real();
    const double phi2 = 2.0 * (0.125 * e3 * z3 + e1 * w[i]).real();
    const double h3 = 3.0 * e4 * phi1 * phi2 * phi2 + e6 * phi2 * phi2 * phi2;
    out.h[i] = 2.0 * h1.real() + 2.0 * h2.real() + h3;
    out.s[i] = phi1 + e2 * phi2;
  }
  return out;
}

}  // namespace detail

/// Direct solve of the second-order remainder equation
///
///   eps^2 r_tt - Lap r + eps^{-2} r + H1 + H2 + H3 + H_r = 0,
///   r(0) = 0,  r_t(0) = remainder_initial_velocity(v0, w0, eps),
///
/// with H_r = 3 S^2 r + 3 S r^2 + r^3 and S = Phi1 + eps^2 Phi2. The forcing
/// is read off the profile trajectories, which must be sampled uniformly with
/// spacing equal to opts.dt; w_tt comes from a 3-point centered difference of
/// the stored w samples (second-order one-sided at the ends). The stepper is
/// kick-rotate-kick with the kicks at sample times; opts.scheme is ignored.
/// Returns r1 at sample_times, each of which must be a trajectory time.
inline std::vector<SpectralField> remainder_solve(const ProfileTrajectory& v_traj, const ProfileTrajectory& w_traj,
                                                  double eps, std::span<const double> sample_times,
                                                  const KGOptions& opts) {
  detail::check_eps(eps);
  detail::require(opts.formulation == Formulation::physical, "remainder solver runs in the physical formulation");
  detail::require(w_traj.has_w(), "w trajectory carries no w samples");
  detail::require(same_grid(v_traj.grid, w_traj.grid), "profile trajectories live on different grids");
  detail::require(v_traj.sample_times == w_traj.sample_times, "v and w trajectories have different sample times");
  detail::check_sample_times(sample_times);
  detail::check_kg_dt(eps, opts);

  const auto& times = w_traj.sample_times;
  const std::size_t count = times.size();
  if (count < 4) throw ConfigError("remainder solver needs at least 4 profile samples for the w_tt stencil");
  const double h = opts.dt;
  for (std::size_t i = 0; i < count; ++i) {
    if (std::abs(times[i] - static_cast<double>(i) * h) > 1e-9 * std::max(1.0, times[i])) {
      throw ConfigError("profile samples must be uniformly spaced at the remainder step " + std::to_string(h));
    }
  }
  std::vector<std::size_t> wanted;
  for (double t : sample_times) {
    const double idx = std::round(t / h);
    if (std::abs(t - idx * h) > 1e-9 * std::max(1.0, t) || idx >= static_cast<double>(count)) {
      throw ConfigError("sample time " + std::to_string(t) + " is not covered by the profile samples");
    }
    wanted.push_back(static_cast<std::size_t>(idx));
  }

  const auto& V = v_traj.v_samples;
  const auto& W = w_traj.w_samples;
  const double inv_h2 = 1.0 / (h * h);
  auto wtt_at = [&](std::size_t i) {
    SpectralField out(w_traj.grid);
    for (std::size_t j = 0; j < out.size(); ++j) {
      if (i == 0) {
        out[j] = (2.0 * W[0][j] - 5.0 * W[1][j] + 4.0 * W[2][j] - W[3][j]) * inv_h2;
      } else if (i + 1 == count) {
        out[j] = (2.0 * W[i][j] - 5.0 * W[i - 1][j] + 4.0 * W[i - 2][j] - W[i - 3][j]) * inv_h2;
      } else {
        out[j] = (W[i + 1][j] - 2.0 * W[i][j] + W[i - 1][j]) * inv_h2;
      }
    }
    return out;
  };

  const GridPtr& grid = w_traj.grid;
  KGOptions linear = opts;
  linear.scheme = KGScheme::strang;
  linear.nonlinearity_enabled = false;
  const KGPropagator rotate(grid, eps, linear);
  const double inv_e2 = 1.0 / (eps * eps);

  // r is real; only real parts are carried between kicks.
  SpectralField r(grid);
  SpectralField rt = remainder_initial_velocity(V[0], W[0], eps);
  auto kick = [&](std::size_t i, double dt_half) {
    const auto src = detail::remainder_source(V[i], W[i], wtt_at(i), times[i], eps);
    for (std::size_t j = 0; j < r.size(); ++j) {
      const double x = r[j].real();
      const double s = src.s[j];
      const double hr = 3.0 * s * s * x + 3.0 * s * x * x + x * x * x;
      rt[j] -= dt_half * inv_e2 * (src.h[j] + hr);
    }
  };

  const std::size_t last = *std::max_element(wanted.begin(), wanted.end());
  std::vector<SpectralField> out(wanted.size(), SpectralField(grid));
  auto capture = [&](std::size_t i) {
    for (std::size_t k = 0; k < wanted.size(); ++k) {
      if (wanted[k] == i) out[k] = real_part(r);
    }
  };
  capture(0);
  for (std::size_t i = 0; i < last; ++i) {
    kick(i, 0.5 * h);
    rotate.step(r, rt);
    kick(i + 1, 0.5 * h);
    capture(i + 1);
  }
  return out;
}

/// Profiles (v and w) sampled every h on [0, t_end], the layout remainder_solve
/// expects; both profile solvers step with h / substeps.
inline ProfileTrajectory remainder_profiles(const SpectralField& v0, double t_end, double h, int substeps = 4) {
  if (!(h > 0.0) || substeps < 1) throw ConfigError("remainder profile step and substeps must be positive");
  const double n = std::round(t_end / h);
  if (n < 3.0 || std::abs(t_end - n * h) > 1e-9 * std::max(1.0, t_end)) {
    throw ConfigError("t_end must be a multiple of the remainder step with at least 3 steps");
  }
  std::vector<double> times;
  for (std::size_t k = 0; k <= static_cast<std::size_t>(n); ++k) times.push_back(static_cast<double>(k) * h);
  const double dt = h / substeps;
  return solve_profiles(v0, times, dt, dt);
}

}  // namespace nrkg
