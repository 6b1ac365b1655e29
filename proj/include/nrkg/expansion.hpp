#pragma once

// Leading terms of the modulated Fourier expansion
//
//   Phi1 = e^{it/eps^2} v + c.c.
//   Phi2 = (1/8) e^{3it/eps^2} v^3 + e^{it/eps^2} w + c.c.
//
// and the first/second order errors |u - Phi1|, |u - Phi1 - eps^2 Phi2|.

#include <cmath>
#include <complex>

#include "nrkg/errors.hpp"
#include "nrkg/klein_gordon.hpp"
#include "nrkg/spectral.hpp"

namespace nrkg {

inline SpectralField phi1_at(const SpectralField& v, double t, double eps) {
  const cplx phase = std::polar(1.0, t / (eps * eps));
  return map_pointwise(v, [phase](cplx z) { return cplx(2.0 * (phase * z).real(), 0.0); });
}

inline SpectralField phi2_at(const SpectralField& v, const SpectralField& w, double t, double eps) {
  v.check_grid(w);
  const cplx p1 = std::polar(1.0, t / (eps * eps));
  const cplx p3 = std::polar(1.0, 3.0 * t / (eps * eps));
  SpectralField out(v.grid_ptr());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const cplx z = v[i];
    out[i] = 2.0 * (0.125 * p3 * z * z * z + p1 * w[i]).real();
  }
  return out;
}

struct ExpansionErrors {
  double first_order = 0.0;   ///< |u - Phi1|
  double second_order = 0.0;  ///< |u - Phi1 - eps^2 Phi2|
};

struct ExpansionSample {
  double time = 0.0;
  double eps = 0.0;
  SpectralField phi1;
  SpectralField phi2;
  double first_order_error_L2 = 0.0;
  double second_order_error_L2 = 0.0;
};

/// Builds Phi1, Phi2 at the profile time t and measures them against a
/// physical-formulation KG state taken at the same time (|state.time - t| <=
/// 1e-12). With sobolev_index s != 0 the errors are H^s norms.
inline ExpansionSample expansion_sample(const KGState& state, const SpectralField& v, const SpectralField& w, double t,
                                        double sobolev_index = 0.0) {
  detail::require(state.formulation == Formulation::physical, "expansion errors need a physical-formulation state");
  detail::require(std::abs(state.time - t) <= 1e-12,
                  "KG state time " + std::to_string(state.time) + " does not match profile time " + std::to_string(t));
  state.u.check_grid(v);
  const double eps = state.eps;
  ExpansionSample s{t, eps, phi1_at(v, t, eps), phi2_at(v, w, t, eps), 0.0, 0.0};
  SpectralField r = state.u - s.phi1;
  const auto measure = [sobolev_index](const SpectralField& f) {
    return sobolev_index == 0.0 ? l2_norm(f) : sobolev_norm(f, sobolev_index);
  };
  s.first_order_error_L2 = measure(r);
  r -= s.phi2 * cplx(eps * eps, 0.0);
  s.second_order_error_L2 = measure(r);
  return s;
}

inline ExpansionErrors expansion_errors(const KGState& state, const SpectralField& v, const SpectralField& w, double t,
                                        double sobolev_index = 0.0) {
  const auto s = expansion_sample(state, v, w, t, sobolev_index);
  return {s.first_order_error_L2, s.second_order_error_L2};
}

/// u - Phi1 - eps^2 Phi2 as a field.
inline SpectralField second_order_remainder(const KGState& state, const SpectralField& v, const SpectralField& w,
                                            double t) {
  const auto s = expansion_sample(state, v, w, t);
  return real_part(state.u - s.phi1 - s.phi2 * cplx(state.eps * state.eps, 0.0));
}

}  // namespace nrkg
