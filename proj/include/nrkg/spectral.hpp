#pragma once

// Periodic pseudospectral core: grids on the torus [-L, L)^d, complex sampled
// fields, FFTW-backed transforms, Fourier multipliers, Sobolev norms and the
// smooth Littlewood-Paley style frequency projector.
//
// Transform convention: the forward DFT is unscaled, the inverse carries
// 1/points^dim. Physical sample j sits at x_j = -L + j*h, h = 2L/n; Fourier
// coefficients are stored in FFT order (k = 0..n/2-1, -n/2..-1 per axis).

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "nrkg/errors.hpp"

namespace nrkg {

using cplx = std::complex<double>;

/// Wavevector or position; components beyond the grid dimension are zero.
using Vec3 = std::array<double, 3>;

inline double norm_sq(const Vec3& x) { return x[0] * x[0] + x[1] * x[1] + x[2] * x[2]; }

class Grid {
 public:
  Grid(int dim, std::size_t points_per_axis, double half_width)
      : dim_(dim), n_(points_per_axis), half_width_(half_width) {
    if (dim < 1 || dim > 3) {
      throw ConfigError("grid dimension must be 1, 2 or 3 (got " + std::to_string(dim) + ")");
    }
    if (points_per_axis < 16 || (points_per_axis & (points_per_axis - 1)) != 0) {
      throw ConfigError("points per axis must be a power of two >= 16 (got " +
                        std::to_string(points_per_axis) + ")");
    }
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
      throw ConfigError("half width must be positive and finite");
    }
    size_ = 1;
    for (int a = 0; a < dim_; ++a) size_ *= n_;

    const double dk = std::numbers::pi / half_width_;
    const double h = spacing();
    wavenumbers_.resize(n_);
    coordinates_.resize(n_);
    const auto half = static_cast<long>(n_ / 2);
    for (std::size_t j = 0; j < n_; ++j) {
      const auto sj = static_cast<long>(j);
      const long k = sj < half ? sj : sj - static_cast<long>(n_);
      wavenumbers_[j] = dk * static_cast<double>(k);
      coordinates_[j] = -half_width_ + h * static_cast<double>(j);
    }
  }

  int dim() const noexcept { return dim_; }
  std::size_t points_per_axis() const noexcept { return n_; }
  double half_width() const noexcept { return half_width_; }

  /// Total number of samples, points_per_axis^dim.
  std::size_t size() const noexcept { return size_; }

  double spacing() const noexcept { return 2.0 * half_width_ / static_cast<double>(n_); }
  double wavenumber_spacing() const noexcept { return std::numbers::pi / half_width_; }
  double cell_volume() const noexcept { return std::pow(spacing(), dim_); }
  double volume() const noexcept { return std::pow(2.0 * half_width_, dim_); }

  /// Largest resolved wavenumber magnitude per axis (the Nyquist wavenumber).
  double max_wavenumber() const noexcept {
    return wavenumber_spacing() * static_cast<double>(n_ / 2);
  }

  std::span<const double> wavenumbers() const noexcept { return wavenumbers_; }
  std::span<const double> coordinates() const noexcept { return coordinates_; }

  /// Integer mode index (FFT order slot -> signed k) on one axis.
  long mode_index(std::size_t slot) const noexcept {
    const auto s = static_cast<long>(slot);
    return s < static_cast<long>(n_ / 2) ? s : s - static_cast<long>(n_);
  }

  /// True when the slot holds the unmatched Nyquist mode on any axis.
  bool is_nyquist(std::size_t flat) const noexcept {
    for (int a = 0; a < dim_; ++a) {
      if (flat % n_ == n_ / 2) return true;
      flat /= n_;
    }
    return false;
  }

  /// Calls f(flat_index, wavevector) for every Fourier mode, row-major.
  template <class F>
  void for_each_mode(F&& f) const {
    visit(wavenumbers_, std::forward<F>(f));
  }

  /// Calls f(flat_index, position) for every physical sample, row-major.
  template <class F>
  void for_each_point(F&& f) const {
    visit(coordinates_, std::forward<F>(f));
  }

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.dim_ == b.dim_ && a.n_ == b.n_ && a.half_width_ == b.half_width_;
  }

 private:
  template <class F>
  void visit(const std::vector<double>& table, F&& f) const {
    Vec3 p{0.0, 0.0, 0.0};
    std::size_t flat = 0;
    if (dim_ == 1) {
      for (std::size_t i = 0; i < n_; ++i) {
        p[0] = table[i];
        f(flat++, std::as_const(p));
      }
    } else if (dim_ == 2) {
      for (std::size_t i = 0; i < n_; ++i) {
        p[0] = table[i];
        for (std::size_t j = 0; j < n_; ++j) {
          p[1] = table[j];
          f(flat++, std::as_const(p));
        }
      }
    } else {
      for (std::size_t i = 0; i < n_; ++i) {
        p[0] = table[i];
        for (std::size_t j = 0; j < n_; ++j) {
          p[1] = table[j];
          for (std::size_t k = 0; k < n_; ++k) {
            p[2] = table[k];
            f(flat++, std::as_const(p));
          }
        }
      }
    }
  }

  int dim_;
  std::size_t n_;
  double half_width_;
  std::size_t size_ = 0;
  std::vector<double> wavenumbers_;
  std::vector<double> coordinates_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(int dim, std::size_t points_per_axis, double half_width) {
  return std::make_shared<const Grid>(dim, points_per_axis, half_width);
}

inline bool same_grid(const GridPtr& a, const GridPtr& b) {
  return a == b || (a && b && *a == *b);
}

namespace detail {

// FFTW planning is not thread-safe; execution with the new-array interface is.
// Plans are created once per (dim, n, sign) with FFTW_ESTIMATE so the chosen
// algorithm, and therefore every result bit, is reproducible.
class FftPlanCache {
 public:
  static FftPlanCache& instance() {
    static FftPlanCache cache;
    return cache;
  }

  fftw_plan get(int dim, std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(dim, n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::size_t total = 1;
    std::array<int, 3> dims{};
    for (int a = 0; a < dim; ++a) {
      total *= n;
      dims[static_cast<std::size_t>(a)] = static_cast<int>(n);
    }
    auto* in = fftw_alloc_complex(total);
    auto* out = fftw_alloc_complex(total);
    fftw_plan plan = fftw_plan_dft(dim, dims.data(), in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    if (plan == nullptr) throw std::runtime_error("FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

  FftPlanCache(const FftPlanCache&) = delete;
  FftPlanCache& operator=(const FftPlanCache&) = delete;

 private:
  FftPlanCache() = default;
  ~FftPlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::tuple<int, std::size_t, int>, fftw_plan> plans_;
};

inline void execute(const Grid& grid, std::span<const cplx> in, std::span<cplx> out, int sign) {
  require(in.size() == grid.size() && out.size() == grid.size(), "transform size does not match grid");
  require(in.data() != out.data(), "transform must be out of place");
  fftw_plan plan = FftPlanCache::instance().get(grid.dim(), grid.points_per_axis(), sign);
  // Out-of-place complex transforms leave their input untouched.
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace detail

/// Unscaled forward DFT.
inline std::vector<cplx> forward_transform(const Grid& grid, std::span<const cplx> values) {
  std::vector<cplx> out(grid.size());
  detail::execute(grid, values, out, FFTW_FORWARD);
  return out;
}

/// Inverse DFT including the 1/points^dim factor.
inline std::vector<cplx> inverse_transform(const Grid& grid, std::span<const cplx> coeffs) {
  std::vector<cplx> out(grid.size());
  detail::execute(grid, coeffs, out, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (auto& z : out) z *= scale;
  return out;
}

/// Complex samples of a function on a Grid, stored in physical space.
class SpectralField {
 public:
  explicit SpectralField(GridPtr grid) : grid_(std::move(grid)) {
    detail::require(grid_ != nullptr, "field requires a grid");
    values_.assign(grid_->size(), cplx{0.0, 0.0});
  }

  SpectralField(GridPtr grid, std::vector<cplx> values) : grid_(std::move(grid)), values_(std::move(values)) {
    detail::require(grid_ != nullptr, "field requires a grid");
    detail::require(values_.size() == grid_->size(), "sample count does not match grid");
  }

  static SpectralField from_fourier(GridPtr grid, std::span<const cplx> coeffs) {
    auto values = inverse_transform(*grid, coeffs);
    return SpectralField(std::move(grid), std::move(values));
  }

  /// Samples f(x) at every grid point.
  template <class F>
  static SpectralField sample(GridPtr grid, F&& f) {
    SpectralField out(grid);
    grid->for_each_point([&](std::size_t i, const Vec3& x) { out.values_[i] = cplx(f(x)); });
    return out;
  }

  const Grid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<const cplx> values() const noexcept { return values_; }
  std::span<cplx> values() noexcept { return values_; }
  cplx operator[](std::size_t i) const { return values_[i]; }
  cplx& operator[](std::size_t i) { return values_[i]; }

  std::vector<cplx> fourier() const { return forward_transform(*grid_, values_); }

  SpectralField& operator+=(const SpectralField& o) {
    check_grid(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    check_grid(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  /// Pointwise product.
  SpectralField& operator*=(const SpectralField& o) {
    check_grid(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] *= o.values_[i];
    return *this;
  }
  SpectralField& operator*=(cplx a) {
    for (auto& z : values_) z *= a;
    return *this;
  }

  void check_grid(const SpectralField& o) const {
    detail::require(same_grid(grid_, o.grid_), "fields live on different grids");
  }

 private:
  GridPtr grid_;
  std::vector<cplx> values_;
};

inline SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
inline SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
inline SpectralField operator*(SpectralField a, const SpectralField& b) { return a *= b; }
inline SpectralField operator*(cplx s, SpectralField a) { return a *= s; }
inline SpectralField operator*(SpectralField a, cplx s) { return a *= s; }
inline SpectralField operator-(SpectralField a) { return a *= cplx(-1.0, 0.0); }

/// Applies f to every sample.
template <class F>
SpectralField map_pointwise(const SpectralField& u, F&& f) {
  SpectralField out(u.grid_ptr());
  auto src = u.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
  return out;
}

inline SpectralField conj(const SpectralField& u) {
  return map_pointwise(u, [](cplx z) { return std::conj(z); });
}

/// Real part as a field (imaginary part dropped).
inline SpectralField real_part(const SpectralField& u) {
  return map_pointwise(u, [](cplx z) { return cplx(z.real(), 0.0); });
}

/// 2 Re(u), the "+ c.c." completion of a complex amplitude.
inline SpectralField plus_cc(const SpectralField& u) {
  return map_pointwise(u, [](cplx z) { return cplx(2.0 * z.real(), 0.0); });
}

/// Physical-space L2 norm by rectangle (equivalently trapezoidal) quadrature.
inline double l2_norm(const SpectralField& u) {
  double s = 0.0;
  for (cplx z : u.values()) s += std::norm(z);
  return std::sqrt(s * u.grid().cell_volume());
}

inline double max_abs(const SpectralField& u) {
  double m = 0.0;
  for (cplx z : u.values()) m = std::max(m, std::abs(z));
  return m;
}

/// L2 norm of the imaginary part relative to the L2 norm of the field.
inline double imag_residue(const SpectralField& u) {
  double im = 0.0;
  double all = 0.0;
  for (cplx z : u.values()) {
    im += z.imag() * z.imag();
    all += std::norm(z);
  }
  return all == 0.0 ? 0.0 : std::sqrt(im / all);
}

/// Real-field predicate: imaginary residue at most rel_tol of the norm.
inline bool is_real(const SpectralField& u, double rel_tol = 1e-11) { return imag_residue(u) <= rel_tol; }

/// Largest |u(-xi) - conj(u(xi))| over matched modes, relative to max |u(xi)|.
/// Zero for exactly real fields; the Nyquist slots must carry real values.
inline double conjugate_symmetry_defect(const SpectralField& u) {
  const auto c = u.fourier();
  const Grid& g = u.grid();
  const std::size_t n = g.points_per_axis();
  double worst = 0.0;
  double scale = 0.0;
  for (cplx z : c) scale = std::max(scale, std::abs(z));
  if (scale == 0.0) return 0.0;
  for (std::size_t flat = 0; flat < c.size(); ++flat) {
    std::size_t rem = flat;
    std::size_t mirror = 0;
    std::size_t stride = 1;
    for (int a = 0; a < g.dim(); ++a) {
      const std::size_t s = rem % n;
      rem /= n;
      mirror += ((n - s) % n) * stride;
      stride *= n;
    }
    worst = std::max(worst, std::abs(c[mirror] - std::conj(c[flat])));
  }
  return worst / scale;
}

/// Sampled Fourier symbol m(xi) on a particular grid.
class Multiplier {
 public:
  Multiplier(GridPtr grid, std::vector<cplx> values) : grid_(std::move(grid)), values_(std::move(values)) {
    detail::require(values_.size() == grid_->size(), "multiplier size does not match grid");
  }

  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::span<const cplx> values() const noexcept { return values_; }

 private:
  GridPtr grid_;
  std::vector<cplx> values_;
};

template <class Symbol>
Multiplier make_multiplier(const GridPtr& grid, Symbol&& m) {
  std::vector<cplx> values(grid->size());
  grid->for_each_mode([&](std::size_t i, const Vec3& xi) { values[i] = cplx(m(xi)); });
  return Multiplier(grid, std::move(values));
}

/// In-place multiplication of Fourier coefficients by a sampled symbol.
inline void multiply_coefficients(std::span<cplx> coeffs, const Multiplier& m) {
  auto mv = m.values();
  detail::require(coeffs.size() == mv.size(), "coefficient count does not match multiplier");
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] *= mv[i];
}

/// F^{-1}(m F(u)).
inline SpectralField apply_multiplier(const SpectralField& u, const Multiplier& m) {
  detail::require(same_grid(u.grid_ptr(), m.grid_ptr()), "multiplier and field live on different grids");
  auto c = u.fourier();
  multiply_coefficients(c, m);
  return SpectralField::from_fourier(u.grid_ptr(), c);
}

template <class Symbol>
  requires std::invocable<Symbol, const Vec3&>
SpectralField apply_multiplier(const SpectralField& u, Symbol&& m) {
  return apply_multiplier(u, make_multiplier(u.grid_ptr(), std::forward<Symbol>(m)));
}

/// Smooth radial cutoff: 1 on r <= 1, 0 on r >= 11/10, C-infinity and strictly
/// decreasing in between.
inline double bump(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 1.1) return 0.0;
  const auto q = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
  const double s = (r - 1.0) / 0.1;
  return q(1.0 - s) / (q(s) + q(1.0 - s));
}

namespace symbols {

inline auto laplacian() {
  return [](const Vec3& xi) { return cplx(-norm_sq(xi), 0.0); };
}

/// <xi>^s with <xi> = (1 + |xi|^2)^{1/2}.
inline auto bracket_power(double s) {
  return [s](const Vec3& xi) { return cplx(std::pow(1.0 + norm_sq(xi), 0.5 * s), 0.0); };
}

/// <xi>_2^beta (ln <xi>_2)^{-1} with <xi>_2 = (|xi|^2 + 2)^{1/2}.
inline auto log_corrected_bracket2(double beta) {
  return [beta](const Vec3& xi) {
    const double b = std::sqrt(norm_sq(xi) + 2.0);
    return cplx(std::pow(b, beta) / std::log(b), 0.0);
  };
}

/// phi(xi / N).
inline auto low_pass(double cutoff) {
  return [cutoff](const Vec3& xi) { return cplx(bump(std::sqrt(norm_sq(xi)) / cutoff), 0.0); };
}

}  // namespace symbols

inline SpectralField laplacian(const SpectralField& u) { return apply_multiplier(u, symbols::laplacian()); }

/// Discrete H^s norm (sum over modes of <xi>^{2s} |u_hat|^2 times the Parseval
/// weight volume / points^{2 dim}) ^ {1/2}.
inline double sobolev_norm(const SpectralField& u, double s) {
  const auto c = u.fourier();
  double acc = 0.0;
  u.grid().for_each_mode([&](std::size_t i, const Vec3& xi) {
    acc += std::pow(1.0 + norm_sq(xi), s) * std::norm(c[i]);
  });
  const double n = static_cast<double>(u.grid().size());
  return std::sqrt(acc * u.grid().volume() / (n * n));
}

/// Fourier coefficients of P_{<=N} u and P_{>N} u whose sum reproduces the
/// coefficients of u exactly. Each coefficient is split so that one half is
/// an exact floating-point difference of the other.
struct FrequencySplit {
  std::vector<cplx> low;
  std::vector<cplx> high;
};

inline FrequencySplit frequency_split(const SpectralField& u, double cutoff) {
  if (!(cutoff > 0.0)) throw ConfigError("projector cutoff must be positive");
  FrequencySplit out{u.fourier(), {}};
  out.high.resize(out.low.size());
  u.grid().for_each_mode([&](std::size_t i, const Vec3& xi) {
    const double phi = bump(std::sqrt(norm_sq(xi)) / cutoff);
    const cplx z = out.low[i];
    const auto split = [phi](double x, double& lo, double& hi) {
      if (phi >= 0.5) {
        lo = phi * x;
        hi = x - lo;
      } else {
        hi = (1.0 - phi) * x;
        lo = x - hi;
      }
    };
    double lr = 0.0, hr = 0.0, li = 0.0, hi = 0.0;
    split(z.real(), lr, hr);
    split(z.imag(), li, hi);
    out.low[i] = cplx(lr, li);
    out.high[i] = cplx(hr, hi);
  });
  return out;
}

inline SpectralField project_low(const SpectralField& u, double cutoff) {
  return SpectralField::from_fourier(u.grid_ptr(), frequency_split(u, cutoff).low);
}

inline SpectralField project_high(const SpectralField& u, double cutoff) {
  return SpectralField::from_fourier(u.grid_ptr(), frequency_split(u, cutoff).high);
}

/// e^{i k.x} with integer mode vector k (units of the grid's wavenumber spacing).
inline SpectralField plane_wave(const GridPtr& grid, const std::array<long, 3>& mode, cplx amplitude = 1.0) {
  const double dk = grid->wavenumber_spacing();
  return SpectralField::sample(grid, [&](const Vec3& x) {
    const double phase = dk * (static_cast<double>(mode[0]) * x[0] + static_cast<double>(mode[1]) * x[1] +
                               static_cast<double>(mode[2]) * x[2]);
    return amplitude * std::polar(1.0, phase);
  });
}

}  // namespace nrkg
