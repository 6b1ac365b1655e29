#pragma once

// Initial-data families. Every family produces the complex profile datum v0;
// the Klein-Gordon data follow as u0 = 2 Re v0, u1 = -2 Im v0, so that
// v0 = (u0 - i u1)/2 holds by construction.
//
//   gaussian: g(x) = A0^{d/2} exp(-A0^2 |x|^2)
//   rough:    g = F^{-1}( <xi>_2^{-alpha-d/2} (ln <xi>_2)^{-1} ),  <xi>_2 = (|xi|^2+2)^{1/2}
//   file:     v0 read from a field dump
//
// Both analytic families take a dilation s and return g(s x), which is how
// the scaled formulation regenerates data on the dilated grid.

#include <cmath>
#include <numbers>
#include <string>

#include "nrkg/errors.hpp"
#include "nrkg/field_io.hpp"
#include "nrkg/spectral.hpp"

namespace nrkg {

enum class DataFamily { gaussian, rough, file };

/// zero: v0 = delta0 g (so u1 = 0). from_v0: v0 = delta0 e^{-i pi/4} g, which
/// gives u0 = u1 = sqrt(2) delta0 g.
enum class U1Mode { zero, from_v0 };

inline std::string to_string(DataFamily f) {
  switch (f) {
    case DataFamily::gaussian: return "gaussian";
    case DataFamily::rough: return "rough";
    case DataFamily::file: return "file";
  }
  return "?";
}

inline std::string to_string(U1Mode m) { return m == U1Mode::zero ? "zero" : "from_v0"; }

inline DataFamily parse_data_family(const std::string& s) {
  if (s == "gaussian") return DataFamily::gaussian;
  if (s == "rough") return DataFamily::rough;
  if (s == "file") return DataFamily::file;
  throw ConfigError("unknown data family '" + s + "' (expected gaussian, rough or file)");
}

inline U1Mode parse_u1_mode(const std::string& s) {
  if (s == "zero") return U1Mode::zero;
  if (s == "from_v0") return U1Mode::from_v0;
  throw ConfigError("unknown u1_mode '" + s + "' (expected zero or from_v0)");
}

struct DataSpec {
  DataFamily family = DataFamily::gaussian;
  double A0 = 2.0;      // gaussian only
  double alpha = 4.0;   // rough only
  double delta0 = 0.5;
  U1Mode u1_mode = U1Mode::zero;
  std::string path;     // file only: stem of a field dump holding v0

  void validate() const {
    if (!(delta0 > 0.0)) throw ConfigError("delta0 must be positive");
    if (family == DataFamily::gaussian && !(A0 > 0.0)) throw ConfigError("A0 must be positive");
    if (family == DataFamily::rough && !(alpha >= 4.0 && alpha <= 8.0)) {
      throw ConfigError("alpha must lie in [4, 8] for rough data (got " + std::to_string(alpha) + ")");
    }
    if (family == DataFamily::file && path.empty()) throw ConfigError("file data needs a path");
  }
};

/// Samples delta0 * g(s x) for the Gaussian g. Throws ConfigError when the
/// value at the torus boundary exceeds 1e-12 of the peak.
inline SpectralField gen_gaussian(const GridPtr& grid, double A0, double delta0, double dilation = 1.0) {
  if (!(A0 > 0.0)) throw ConfigError("A0 must be positive");
  const double amp = delta0 * std::pow(A0, 0.5 * grid->dim());
  const double a2 = A0 * A0 * dilation * dilation;
  const double L = grid->half_width();
  if (std::exp(-a2 * L * L) > 1e-12) {
    const double needed = std::sqrt(12.0 * std::log(10.0) / a2);
    throw ConfigError("Gaussian data does not decay to 1e-12 at the torus boundary; use half_width >= " +
                      std::to_string(needed));
  }
  return SpectralField::sample(grid, [&](const Vec3& x) { return amp * std::exp(-a2 * norm_sq(x)); });
}

/// <xi>_2^{-alpha-d/2} (ln <xi>_2)^{-1}.
inline double rough_symbol(const Vec3& xi, double alpha, int dim) {
  const double b = std::sqrt(norm_sq(xi) + 2.0);
  return std::pow(b, -alpha - 0.5 * dim) / std::log(b);
}

/// delta0 * g(s x) for the rough family, built from its Fourier transform on
/// the discrete wavenumber set (Nyquist slots zeroed). Uses the continuum
/// inversion g(x) = (2 pi)^{-d} int e^{i x xi} g_hat(xi) d xi discretized on
/// the torus, so the result approximates the function on R^d.
inline SpectralField gen_rough(const GridPtr& grid, double alpha, double delta0, double dilation = 1.0) {
  if (!(alpha >= 4.0 && alpha <= 8.0)) {
    throw ConfigError("alpha must lie in [4, 8] for rough data (got " + std::to_string(alpha) + ")");
  }
  const int d = grid->dim();
  // g(s y) has transform s^{-d} g_hat(eta / s); the torus sum carries (2 L)^{-d}.
  const double scale =
      delta0 * std::pow(dilation, -d) * std::pow(2.0 * grid->half_width(), -d) * static_cast<double>(grid->size());
  const double L = grid->half_width();
  std::vector<cplx> coeffs(grid->size());
  grid->for_each_mode([&](std::size_t i, const Vec3& eta) {
    if (grid->is_nyquist(i)) {
      coeffs[i] = 0.0;
      return;
    }
    const Vec3 xi{eta[0] / dilation, eta[1] / dilation, eta[2] / dilation};
    // Samples start at x = -L, hence the factor e^{-i eta L} = (-1)^k per axis.
    const double shift = -(eta[0] + eta[1] + eta[2]) * L;
    coeffs[i] = scale * rough_symbol(xi, alpha, d) * std::polar(1.0, shift);
  });
  SpectralField g = SpectralField::from_fourier(grid, coeffs);
  return real_part(g);
}

/// The profile datum v0 for a data spec, sampled as v0(s x).
inline SpectralField make_v0(const DataSpec& spec, const GridPtr& grid, double dilation = 1.0) {
  spec.validate();
  SpectralField g(grid);
  switch (spec.family) {
    case DataFamily::gaussian: g = gen_gaussian(grid, spec.A0, spec.delta0, dilation); break;
    case DataFamily::rough: g = gen_rough(grid, spec.alpha, spec.delta0, dilation); break;
    case DataFamily::file: {
      if (dilation != 1.0) throw ConfigError("file data cannot be regenerated in scaled coordinates");
      return read_field(spec.path, grid);
    }
  }
  if (spec.u1_mode == U1Mode::from_v0) g *= std::polar(1.0, -0.25 * std::numbers::pi);
  return g;
}

struct InitialData {
  SpectralField v0;
  SpectralField u0;
  SpectralField u1;
};

/// u0 = 2 Re v0, u1 = -2 Im v0.
inline InitialData initial_data_from_v0(const SpectralField& v0) {
  SpectralField u0 = map_pointwise(v0, [](cplx z) { return cplx(2.0 * z.real(), 0.0); });
  SpectralField u1 = map_pointwise(v0, [](cplx z) { return cplx(-2.0 * z.imag(), 0.0); });
  return {v0, std::move(u0), std::move(u1)};
}

inline InitialData make_initial_data(const DataSpec& spec, const GridPtr& grid) {
  return initial_data_from_v0(make_v0(spec, grid));
}

/// Scaled-formulation data U0 = eps u0(eps y), U1 = eps u1(eps y) on the
/// dilated grid `scaled`, generated analytically (no resampling).
inline InitialData make_scaled_initial_data(const DataSpec& spec, const GridPtr& scaled, double eps) {
  InitialData d = initial_data_from_v0(make_v0(spec, scaled, eps));
  d.u0 *= cplx(eps, 0.0);
  d.u1 *= cplx(eps, 0.0);
  return d;
}

}  // namespace nrkg
