#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

#include "nrkg/data.hpp"
#include "nrkg/profile.hpp"
#include "test_util.hpp"

using namespace nrkg;
using nrkg::testing::random_bump_field;
using nrkg::testing::rel_diff;

namespace {

GridPtr grid1() { return make_grid(1, 256, 8.0); }

SpectralField gaussian_v0(const GridPtr& g, double A0 = 2.0, double delta0 = 0.5) {
  return gen_gaussian(g, A0, delta0);
}

SpectralField constant(const GridPtr& g, cplx c) {
  return SpectralField::sample(g, [c](const Vec3&) { return c; });
}

double observed_order(double e_coarse, double e_fine) { return std::log2(e_coarse / e_fine); }

}  // namespace

TEST(InitialData, V0FromData) {
  const auto g = grid1();
  const auto h = gaussian_v0(g);
  EXPECT_EQ(l2_norm(v0_from_data(SpectralField(g), SpectralField(g))), 0.0);
  EXPECT_LE(rel_diff(v0_from_data(h * cplx(2.0, 0.0), SpectralField(g)), h), 1e-15);
  EXPECT_LE(rel_diff(v0_from_data(SpectralField(g), h * cplx(2.0, 0.0)), h * cplx(0.0, -1.0)), 1e-15);
}

TEST(InitialData, V0FromDataRejectsComplexInputs) {
  const auto g = grid1();
  const auto h = gaussian_v0(g) * cplx(0.0, 1.0);
  EXPECT_THROW(v0_from_data(h, SpectralField(g)), ContractViolation);
  EXPECT_THROW(v0_from_data(SpectralField(g), h), ContractViolation);
}

TEST(InitialData, W0FromZero) {
  const auto g = grid1();
  EXPECT_EQ(l2_norm(w0_from_v0(SpectralField(g))), 0.0);
}

TEST(InitialData, W0FromRealV0IsMinusEighthCube) {
  const auto g = grid1();
  const auto h = gaussian_v0(g);
  const auto expected = map_pointwise(h, [](cplx z) { return -0.125 * z * z * z; });
  EXPECT_LE(rel_diff(w0_from_v0(h), expected), 1e-14);
}

TEST(InitialData, W0FromImaginaryV0) {
  const auto g = grid1();
  const auto h = gaussian_v0(g);
  // v0 = i g:  w0 = (i/2) Lap g - (9i/8) g^3.
  const auto lap = laplacian(h);
  SpectralField expected(g);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const double gi = h[i].real();
    expected[i] = cplx(0.0, 0.5) * lap[i].real() - cplx(0.0, 9.0 / 8.0) * gi * gi * gi;
  }
  EXPECT_LE(rel_diff(w0_from_v0(h * cplx(0.0, 1.0)), expected), 1e-13);
}

TEST(Derivatives, ZeroField) {
  const auto g = grid1();
  EXPECT_EQ(l2_norm(dt_v(SpectralField(g))), 0.0);
  EXPECT_EQ(l2_norm(dtt_v(SpectralField(g))), 0.0);
}

TEST(Derivatives, PlaneWaveFirstDerivative) {
  const auto g = make_grid(1, 64, std::numbers::pi);
  const cplx c(0.3, 0.4);
  const auto v = plane_wave(g, {5, 0, 0}, c);
  const double k2 = 25.0;
  const cplx factor = cplx(0.0, -0.5) * (-k2 - 3.0 * std::norm(c));
  EXPECT_LE(rel_diff(dt_v(v), v * factor), 1e-13);
}

TEST(Derivatives, UniformSecondDerivativeClosedForm) {
  const auto g = grid1();
  const cplx c(0.6, -0.3);
  const auto v = constant(g, c);
  const double m = std::norm(c);
  EXPECT_LE(rel_diff(dtt_v(v), v * cplx(-2.25 * m * m, 0.0)), 1e-14);
}

namespace {

struct FdErrors {
  double first;
  double second;
};

// Centered differences of a finely solved trajectory around t against the
// analytic derivative operators.
FdErrors fd_errors(const SpectralField& v0, double t, double delta) {
  const double dt = 2.5e-4;
  const std::vector<double> times{0.0, t - delta, t, t + delta};
  const auto traj = solve_v(v0, times, dt);
  const auto& vm = traj.v_samples[1];
  const auto& vc = traj.v_samples[2];
  const auto& vp = traj.v_samples[3];
  const auto d1 = (vp - vm) * cplx(0.5 / delta, 0.0);
  const auto d2 = (vp - vc * cplx(2.0, 0.0) + vm) * cplx(1.0 / (delta * delta), 0.0);
  return {rel_diff(d1, dt_v(vc)), rel_diff(d2, dtt_v(vc))};
}

}  // namespace

TEST(Derivatives, FiniteDifferenceOracleIsSecondOrder) {
  const auto g = grid1();
  const auto v0 = gaussian_v0(g, 1.0, 0.5);
  const auto coarse = fd_errors(v0, 0.5, 0.04);
  const auto fine = fd_errors(v0, 0.5, 0.02);
  EXPECT_NEAR(coarse.first / fine.first, 4.0, 1.0);
  EXPECT_NEAR(coarse.second / fine.second, 4.0, 1.0);
  EXPECT_LT(fine.first, 1e-2);
  EXPECT_LT(fine.second, 1e-2);
}

TEST(SolveV, ZeroDataStaysZero) {
  const auto g = grid1();
  const std::vector<double> times{0.0, 0.5, 1.0};
  const auto traj = solve_v(SpectralField(g), times, 0.01);
  for (const auto& v : traj.v_samples) EXPECT_EQ(l2_norm(v), 0.0);
}

TEST(SolveV, PlaneWaveIsExactForAnyStep) {
  const auto g = make_grid(1, 64, std::numbers::pi);
  const cplx c(0.5, 0.2);
  const auto v0 = plane_wave(g, {3, 0, 0}, c);
  const std::vector<double> times{0.0, 1.0};
  for (double dt : {0.5, 0.1, 0.01}) {
    const auto traj = solve_v(v0, times, dt);
    const double phase = 1.0 * (9.0 + 3.0 * std::norm(c)) / 2.0;
    const auto exact = v0 * std::polar(1.0, phase);
    EXPECT_LE(l2_norm(traj.v_samples.back() - exact), 1e-10) << "dt=" << dt;
  }
}

TEST(SolveV, FirstSampleIsInitialDataExactly) {
  const auto g = grid1();
  std::mt19937 rng(21);
  const auto v0 = random_bump_field(g, rng, 0.5);
  const std::vector<double> times{0.0, 0.1};
  const auto traj = solve_v(v0, times, 0.01);
  EXPECT_EQ(traj.v_samples.front().values().size(), v0.size());
  for (std::size_t i = 0; i < v0.size(); ++i) ASSERT_EQ(traj.v_samples.front()[i], v0[i]);
}

TEST(SolveV, MassConservedOverFourUnits) {
  const auto g = grid1();
  std::mt19937 rng(22);
  for (int trial = 0; trial < 3; ++trial) {
    const auto v0 = random_bump_field(g, rng, 0.7);
    std::vector<double> times;
    for (int k = 0; k <= 8; ++k) times.push_back(0.5 * k);
    const auto traj = solve_v(v0, times, 0.01);
    const double m0 = l2_norm(v0);
    for (const auto& v : traj.v_samples) EXPECT_LE(std::abs(l2_norm(v) - m0) / m0, 1e-9);
  }
}

TEST(SolveV, StrangSelfConvergenceIsSecondOrder) {
  const auto g = grid1();
  const auto v0 = gaussian_v0(g);
  const std::vector<double> times{0.0, 1.0};
  std::vector<SpectralField> sol;
  for (double dt : {0.02, 0.01, 0.005}) sol.push_back(solve_v(v0, times, dt).v_samples.back());
  const double order = observed_order(l2_norm(sol[0] - sol[1]), l2_norm(sol[1] - sol[2]));
  EXPECT_NEAR(order, 2.0, 0.2);
}

TEST(SolveV, NonDividingStepIsConfigError) {
  const auto g = grid1();
  const std::vector<double> times{0.0, 1.0};
  EXPECT_THROW(solve_v(SpectralField(g), times, 0.3), ConfigError);
}

TEST(SolveV, SampleTimesMustStartAtZeroAndIncrease) {
  const auto g = grid1();
  EXPECT_THROW(solve_v(SpectralField(g), std::vector<double>{0.5, 1.0}, 0.1), ConfigError);
  EXPECT_THROW(solve_v(SpectralField(g), std::vector<double>{0.0, 1.0, 1.0}, 0.1), ConfigError);
}

TEST(SolveW, TrivialDataGivesExactZero) {
  const auto g = grid1();
  const std::vector<double> times{0.0, 0.5, 1.0};
  const auto vt = solve_v(SpectralField(g), times, 0.01);
  const auto wt = solve_w(vt, SpectralField(g), times, {0.01, true});
  ASSERT_EQ(wt.w_samples.size(), 3u);
  for (const auto& w : wt.w_samples) {
    for (cplx z : w.values()) ASSERT_EQ(z, cplx(0.0, 0.0));
  }
}

TEST(SolveW, FirstSampleIsW0Exactly) {
  const auto g = grid1();
  const auto v0 = gaussian_v0(g);
  const auto w0 = w0_from_v0(v0);
  const std::vector<double> times{0.0, 0.1};
  const auto wt = solve_w(solve_v(v0, times, 0.01), w0, times, {0.01, true});
  for (std::size_t i = 0; i < w0.size(); ++i) ASSERT_EQ(wt.w_samples.front()[i], w0[i]);
}

namespace {

// Spatially uniform (v, w) system integrated as a two-component complex ODE
// with classical RK4 at a tiny step; independent of the split-step solver.
std::array<cplx, 2> uniform_oracle(cplx c, cplx w0, double T) {
  const auto rhs = [](const std::array<cplx, 2>& y) {
    const cplx v = y[0], w = y[1];
    const double m = std::norm(v);
    const cplx vt = cplx(0.0, 1.5) * m * v;
    // v_tt for the uniform flow: d/dt (1.5 i |v|^2 v) with |v| constant.
    const cplx vtt = cplx(0.0, 1.5) * m * vt;
    const cplx src = vtt + 0.375 * m * m * v;
    const cplx wt = cplx(0.0, 0.5) * (src + 3.0 * (v * v * std::conj(w) + 2.0 * m * w));
    return std::array<cplx, 2>{vt, wt};
  };
  std::array<cplx, 2> y{c, w0};
  const int n = 200000;
  const double h = T / n;
  for (int s = 0; s < n; ++s) {
    const auto k1 = rhs(y);
    const auto k2 = rhs({y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]});
    const auto k3 = rhs({y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]});
    const auto k4 = rhs({y[0] + h * k3[0], y[1] + h * k3[1]});
    for (int i = 0; i < 2; ++i) y[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return y;
}

}  // namespace

TEST(SolveW, UniformDataMatchesOdeOracle) {
  const auto g = make_grid(1, 16, 1.0);
  const cplx c(0.5, 0.3);
  const auto v0 = constant(g, c);
  const auto w0 = w0_from_v0(v0);
  const std::vector<double> times{0.0, 1.0};
  const auto wt = solve_w(solve_v(v0, times, 0.01), w0, times, {0.01, true});
  const auto oracle = uniform_oracle(c, w0[0], 1.0);
  for (cplx z : wt.w_samples.back().values()) EXPECT_LE(std::abs(z - oracle[1]), 1e-6);
  for (cplx z : wt.v_samples.back().values()) EXPECT_LE(std::abs(z - oracle[0]), 1e-10);
}

TEST(SolveW, SelfConvergenceAtLeastSecondOrder) {
  const auto g = grid1();
  const auto v0 = gaussian_v0(g);
  const auto w0 = w0_from_v0(v0);
  const std::vector<double> times{0.0, 1.0};
  std::vector<SpectralField> sol;
  for (double dt : {0.02, 0.01, 0.005}) {
    sol.push_back(solve_w(solve_v(v0, times, dt), w0, times, {dt, true}).w_samples.back());
  }
  const double order = observed_order(l2_norm(sol[0] - sol[1]), l2_norm(sol[1] - sol[2]));
  EXPECT_GE(order, 1.9);
}

TEST(SolveW, HomogeneousProblemIsRealLinear) {
  const auto g = grid1();
  std::mt19937 rng(23);
  const auto v0 = gaussian_v0(g);
  const auto wa = random_bump_field(g, rng, 0.3);
  const auto wb = random_bump_field(g, rng, 0.3);
  const std::vector<double> times{0.0, 0.5, 1.0};
  const auto vt = solve_v(v0, times, 0.01);
  const WSolverOptions opts{0.01, false};
  const double a = 0.7, b = -1.3;
  const auto combo = solve_w(vt, wa * cplx(a, 0.0) + wb * cplx(b, 0.0), times, opts).w_samples.back();
  const auto sa = solve_w(vt, wa, times, opts).w_samples.back();
  const auto sb = solve_w(vt, wb, times, opts).w_samples.back();
  EXPECT_LE(l2_norm(combo - (sa * cplx(a, 0.0) + sb * cplx(b, 0.0))), 1e-8);
  // Not complex-linear: the conj(w) coupling breaks i-homogeneity.
  const auto si = solve_w(vt, wa * cplx(0.0, 1.0), times, opts).w_samples.back();
  EXPECT_GT(l2_norm(si - sa * cplx(0.0, 1.0)), 1e-4);
}

TEST(SolveW, GridMismatchIsContractViolation) {
  const auto g1 = grid1();
  const auto g2 = make_grid(1, 128, 8.0);
  const std::vector<double> times{0.0, 0.1};
  const auto vt = solve_v(SpectralField(g1), times, 0.01);
  EXPECT_THROW(solve_w(vt, SpectralField(g2), times, {0.01, true}), ContractViolation);
}

TEST(Profiles, DefaultStepDividesSampleIntervals) {
  const std::vector<double> times{0.0, 0.25, 0.5, 1.0, 2.0};
  const double dt = default_profile_dt(times);
  EXPECT_LE(dt, 1e-2);
  EXPECT_LE(dt, 0.25 / 8.0);
  EXPECT_NO_THROW(detail::steps_per_interval(times, dt));
}
