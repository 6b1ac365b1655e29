#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nrkg/data.hpp"
#include "nrkg/expansion.hpp"
#include "nrkg/klein_gordon.hpp"
#include "nrkg/profile.hpp"
#include "test_util.hpp"

using namespace nrkg;
using nrkg::testing::rel_diff;

namespace {

GridPtr grid1() { return make_grid(1, 256, 8.0); }

InitialData gaussian_data(const GridPtr& g, U1Mode mode = U1Mode::zero) {
  DataSpec d;
  d.u1_mode = mode;
  return make_initial_data(d, g);
}

KGOptions physical(double eps, double ratio = 0.125, KGScheme scheme = KGScheme::kahan_li6) {
  KGOptions o;
  o.dt = ratio * eps * eps;
  o.scheme = scheme;
  return o;
}

}  // namespace

TEST(KGSolve, ZeroDataStaysZero) {
  const auto g = grid1();
  const std::vector<double> times{0.0, 0.25, 0.5};
  for (double eps : {1.0, 0.25}) {
    const auto states = kg_solve(SpectralField(g), SpectralField(g), eps, times, physical(eps));
    for (const auto& s : states) {
      EXPECT_EQ(l2_norm(s.u), 0.0);
      EXPECT_EQ(l2_norm(s.ut), 0.0);
      EXPECT_EQ(energy(s), 0.0);
    }
  }
}

TEST(KGSolve, InitialVelocityCarriesInverseEpsSquared) {
  const auto g = grid1();
  const auto d = gaussian_data(g, U1Mode::from_v0);
  const double eps = 0.25;
  const auto states = kg_solve(d.u0, d.u1, eps, std::vector<double>{0.0, 0.0625}, physical(eps));
  EXPECT_EQ(states.front().time, 0.0);
  for (std::size_t i = 0; i < d.u1.size(); ++i) {
    ASSERT_EQ(states.front().ut[i], d.u1[i] * cplx(1.0 / (eps * eps), 0.0));
    ASSERT_EQ(states.front().u[i], d.u0[i]);
  }
}

TEST(KGStep, LinearSingleModeMatchesOscillator) {
  const auto g = make_grid(1, 64, std::numbers::pi);
  for (Formulation f : {Formulation::physical, Formulation::scaled}) {
    for (KGScheme scheme : {KGScheme::strang, KGScheme::suzuki4, KGScheme::kahan_li6}) {
      const double eps = 0.5;
      KGOptions o;
      o.formulation = f;
      o.scheme = scheme;
      o.nonlinearity_enabled = false;
      o.dt = 0.9 * max_kg_dt(eps, f);
      const long k = 5;
      const auto u0 = real_part(plane_wave(g, {k, 0, 0}));
      KGState s{u0, SpectralField(g), 0.0, eps, f};
      const double omega = kg_frequency(Vec3{static_cast<double>(k), 0.0, 0.0}, eps, f);
      for (int n = 1; n <= 20; ++n) {
        s = kg_step(s, o);
        const auto exact = u0 * cplx(std::cos(omega * n * o.dt), 0.0);
        ASSERT_LE(max_abs(s.u - exact), 1e-12) << to_string(f) << " " << to_string(scheme) << " step " << n;
      }
    }
  }
}

TEST(KGStep, StepAboveResolutionBoundIsConfigError) {
  const auto g = grid1();
  const double eps = 0.25;
  KGState s{SpectralField(g), SpectralField(g), 0.0, eps, Formulation::physical};
  KGOptions o = physical(eps, 0.3);
  try {
    kg_step(s, o);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(std::to_string(0.25 * eps * eps)), std::string::npos) << e.what();
  }
  KGOptions sc = KGOptions::scaled_default();
  sc.dt = 0.3;
  KGState ss{SpectralField(g), SpectralField(g), 0.0, eps, Formulation::scaled};
  EXPECT_THROW(kg_step(ss, sc), ConfigError);
}

TEST(KGStep, FormulationMismatchIsContractViolation) {
  const auto g = grid1();
  KGState s{SpectralField(g), SpectralField(g), 0.0, 0.25, Formulation::scaled};
  EXPECT_THROW(kg_step(s, physical(0.25)), ContractViolation);
}

TEST(KGSolve, InvalidEpsIsConfigError) {
  const auto g = grid1();
  KGOptions o;
  o.dt = 1e-3;
  EXPECT_THROW(kg_solve(SpectralField(g), SpectralField(g), 0.0, std::vector<double>{0.0, 0.1}, o), ConfigError);
  EXPECT_THROW(kg_solve(SpectralField(g), SpectralField(g), 1.5, std::vector<double>{0.0, 0.1}, o), ConfigError);
}

TEST(Energy, InitialStateIdentity) {
  const auto g = grid1();
  const auto d = gaussian_data(g, U1Mode::from_v0);
  const double eps = 0.25;
  const KGState s{d.u0, d.u1 * cplx(1.0 / (eps * eps), 0.0), 0.0, eps, Formulation::physical};
  double pointwise = 0.0;
  for (std::size_t i = 0; i < d.u0.size(); ++i) {
    const double a = d.u0[i].real(), b = d.u1[i].real();
    pointwise += (a * a + b * b) / (eps * eps) + 0.5 * a * a * a * a;
  }
  // |grad u0|^2 by the spectral derivative, squared and summed in physical space.
  const auto ux = apply_multiplier(d.u0, [](const Vec3& xi) { return cplx(0.0, xi[0]); });
  double grad = 0.0;
  for (cplx z : ux.values()) grad += std::norm(z);
  const double expected = (pointwise + grad) * g->cell_volume();
  EXPECT_NEAR(energy(s), expected, 1e-12 * expected);
}

TEST(Energy, DriftBelowToleranceOnGaussianData) {
  const auto g = grid1();
  const auto d = gaussian_data(g);
  const double eps = 0.25;
  std::vector<double> times;
  for (int k = 0; k <= 8; ++k) times.push_back(0.125 * k);
  const auto states = kg_solve(d.u0, d.u1, eps, times, physical(eps));
  const double e0 = energy(states.front());
  for (const auto& s : states) EXPECT_LE(std::abs(energy(s) - e0) / e0, 1e-6) << "t=" << s.time;
}

TEST(KGSolve, StatesStayReal) {
  const auto g = grid1();
  const auto d = gaussian_data(g, U1Mode::from_v0);
  const double eps = 0.25;
  const auto states = kg_solve(d.u0, d.u1, eps, std::vector<double>{0.0, 0.5, 1.0}, physical(eps));
  for (const auto& s : states) {
    EXPECT_LE(imag_residue(s.u), 1e-11);
    EXPECT_LE(imag_residue(s.ut), 1e-11);
  }
}

TEST(KGSolve, ScaledAndPhysicalFormulationsAgree) {
  const auto g = grid1();
  DataSpec spec;
  spec.u1_mode = U1Mode::from_v0;
  const double eps = 0.25;
  const std::vector<double> times{0.0, 0.25, 0.5};
  const auto d = make_initial_data(spec, g);
  const auto phys = kg_solve(d.u0, d.u1, eps, times, physical(eps));
  const auto sg = scaled_grid(*g, eps);
  const auto sd = make_scaled_initial_data(spec, sg, eps);
  const auto scaled = kg_solve(sd.u0, sd.u1, eps, times, KGOptions::scaled_default());
  ASSERT_EQ(scaled.back().formulation, Formulation::scaled);
  EXPECT_DOUBLE_EQ(scaled.back().time, 0.5 / (eps * eps));
  const auto back = unscale(scaled.back(), g);
  EXPECT_NEAR(back.time, 0.5, 1e-15);
  EXPECT_LE(l2_norm(back.u - phys.back().u), 1e-5);
  EXPECT_LE(rel_diff(back.ut, phys.back().ut), 1e-5);
}

TEST(KGSolve, SelfConvergenceOrder) {
  const auto g = grid1();
  const auto d = gaussian_data(g);
  const double eps = 0.25;
  const std::vector<double> times{0.0, 0.5};
  for (KGScheme scheme : {KGScheme::strang, KGScheme::kahan_li6}) {
    std::vector<SpectralField> sol;
    for (double ratio : {0.25, 0.125, 0.0625}) {
      sol.push_back(kg_solve(d.u0, d.u1, eps, times, physical(eps, ratio, scheme)).back().u);
    }
    const double order = std::log2(l2_norm(sol[0] - sol[1]) / l2_norm(sol[1] - sol[2]));
    EXPECT_GE(order, 1.8) << to_string(scheme);
  }
}

TEST(WaveDecomposition, ZeroState) {
  const auto g = grid1();
  const KGState s{SpectralField(g), SpectralField(g), 0.0, 0.5, Formulation::scaled};
  EXPECT_EQ(l2_norm(wave_decompose(s)), 0.0);
}

TEST(WaveDecomposition, ReconstructsStateOnRandomData) {
  std::mt19937 rng(31);
  const auto g = make_grid(2, 64, 6.0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto R = nrkg::testing::random_bump_field(g, rng, 1.0, true);
    const auto Rt = nrkg::testing::random_bump_field(g, rng, 1.0, true);
    const KGState s{R, Rt, 0.0, 0.5, Formulation::scaled};
    const auto phi = wave_decompose(s);
    const auto [r, rt] = wave_reconstruct(phi);
    EXPECT_LE(l2_norm(r - R), 1e-12 * l2_norm(R));
    EXPECT_LE(l2_norm(rt - Rt), 1e-11 * l2_norm(Rt));
  }
}

TEST(WaveDecomposition, PhysicalStateIsContractViolation) {
  const auto g = grid1();
  const KGState s{SpectralField(g), SpectralField(g), 0.0, 0.5, Formulation::physical};
  EXPECT_THROW(wave_decompose(s), ContractViolation);
}

TEST(Remainder, ZeroProfilesGiveZeroRemainder) {
  const auto g = grid1();
  const double eps = 0.25;
  const double h = eps * eps / 8.0;
  const auto prof = remainder_profiles(SpectralField(g), 8 * h, h);
  const std::vector<double> times{0.0, 4 * h, 8 * h};
  const auto r = remainder_solve(prof, prof, eps, times, physical(eps));
  for (const auto& f : r) EXPECT_EQ(l2_norm(f), 0.0);
}

TEST(Remainder, InitialVelocityMatchesDisplayedFormula) {
  const auto g = grid1();
  const auto d = gaussian_data(g, U1Mode::from_v0);
  const double eps = 0.25;
  const auto v0 = d.v0;
  const auto w0 = w0_from_v0(v0);
  // d_t(v^3) = 3 v^2 v_t with v_t = -(i/2)(Lap v - 3|v|^2 v); d_t w from the w equation.
  const auto vt = dt_v(v0);
  const auto lap_w = laplacian(w0);
  const auto f = w_forcing(v0);
  SpectralField expected(g);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const cplx v = v0[i], w = w0[i];
    const cplx wt = cplx(0.0, -0.5) * lap_w[i] +
                    cplx(0.0, 0.5) * (f[i] + 3.0 * (v * v * std::conj(w) + 2.0 * std::norm(v) * w));
    const cplx dv3 = 3.0 * v * v * vt[i];
    expected[i] = -eps * eps * (0.125 * (dv3 + std::conj(dv3)) + wt + std::conj(wt));
  }
  EXPECT_LE(rel_diff(remainder_initial_velocity(v0, w0, eps), expected), 1e-13);
}

TEST(Remainder, StartsAtZeroAndMatchesAssembledDifference) {
  const auto g = grid1();
  DataSpec spec;
  const auto d = make_initial_data(spec, g);
  const double eps = 0.25;
  const double h = eps * eps / 8.0;
  const double T = 0.25;
  const auto prof = remainder_profiles(d.v0, T, h);
  const std::vector<double> times{0.0, T};
  const auto r = remainder_solve(prof, prof, eps, times, physical(eps));
  EXPECT_EQ(l2_norm(r.front()), 0.0);
  const auto states = kg_solve(d.u0, d.u1, eps, times, physical(eps));
  const auto diff = second_order_remainder(states.back(), prof.v_samples.back(), prof.w_samples.back(), T);
  EXPECT_LE(rel_diff(r.back(), diff), 0.05);
}

TEST(Remainder, TooFewSamplesIsConfigError) {
  const auto g = grid1();
  const double eps = 0.25;
  const double h = eps * eps / 8.0;
  const std::vector<double> times{0.0, h, 2 * h};
  const auto prof = solve_profiles(SpectralField(g), times, h / 4, h / 4);
  EXPECT_THROW(remainder_solve(prof, prof, eps, times, physical(eps)), ConfigError);
}

TEST(Remainder, NonUniformSamplesAreConfigError) {
  const auto g = grid1();
  const double eps = 0.25;
  const double h = eps * eps / 8.0;
  const std::vector<double> times{0.0, h, 2 * h, 4 * h};
  const auto prof = solve_profiles(SpectralField(g), times, h / 4, h / 4);
  EXPECT_THROW(remainder_solve(prof, prof, eps, std::vector<double>{0.0, h}, physical(eps)), ConfigError);
}
