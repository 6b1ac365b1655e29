#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "nrkg/data.hpp"
#include "nrkg/field_io.hpp"
#include "nrkg/fit.hpp"
#include "nrkg/klein_gordon.hpp"
#include "test_util.hpp"

using namespace nrkg;
using nrkg::testing::random_bump_field;
using nrkg::testing::rel_diff;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "nrkg_test_data";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Gaussian, PeakValue) {
  const auto g = make_grid(1, 64, 8.0);
  const auto f = gen_gaussian(g, 1.0, 1.0);
  const std::size_t centre = 32;  // x = -L + 32 h = 0
  EXPECT_DOUBLE_EQ(g->coordinates()[centre], 0.0);
  EXPECT_DOUBLE_EQ(f[centre].real(), 1.0);
  EXPECT_EQ(f[centre].imag(), 0.0);
}

TEST(Gaussian, SobolevNormsScaleLikeA0PowerGamma) {
  const auto g = make_grid(1, 1024, 2.0);
  const std::vector<double> a0s{8.0, 16.0, 32.0};
  for (double gamma : {0.0, 2.0, 4.0}) {
    std::vector<double> norms;
    for (double a0 : a0s) norms.push_back(sobolev_norm(gen_gaussian(g, a0, 0.5), gamma));
    const double slope = fit_loglog(a0s, norms).slope;
    if (gamma == 0.0) {
      EXPECT_NEAR(slope, 0.0, 0.1);
    } else {
      EXPECT_NEAR(slope, gamma, 0.1 * gamma) << "gamma=" << gamma;
    }
  }
}

TEST(Gaussian, MassIndependentOfA0InTwoDimensions) {
  const auto g = make_grid(2, 256, 6.0);
  const double delta0 = 0.5;
  const double expected = delta0 * delta0 * std::numbers::pi / 2.0;
  for (double a0 : {1.0, 2.0, 4.0}) {
    const double m = std::pow(l2_norm(gen_gaussian(g, a0, delta0)), 2);
    EXPECT_NEAR(m, expected, 1e-10) << "A0=" << a0;
  }
}

TEST(Gaussian, BoundaryDecayViolationAdvisesHalfWidth) {
  const auto g = make_grid(1, 64, 3.0);
  try {
    gen_gaussian(g, 1.0, 0.5);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("half_width"), std::string::npos);
  }
  EXPECT_THROW(gen_gaussian(g, 0.0, 0.5), ConfigError);
}

TEST(Rough, SymbolAtOrigin) {
  for (int d : {1, 2, 3}) {
    for (double alpha : {4.0, 6.0, 8.0}) {
      const double expected = std::pow(std::sqrt(2.0), -alpha - 0.5 * d) / std::log(std::sqrt(2.0));
      EXPECT_DOUBLE_EQ(rough_symbol(Vec3{0, 0, 0}, alpha, d), expected);
    }
  }
}

TEST(Rough, FieldIsRealAndCentred) {
  for (int d : {1, 2}) {
    const auto g = make_grid(d, d == 1 ? 512 : 64, 16.0);
    const auto f = gen_rough(g, 4.0, 0.5);
    EXPECT_TRUE(is_real(f));
    EXPECT_LE(conjugate_symmetry_defect(f), 1e-12);
    std::size_t peak = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f[i].real() > f[peak].real()) peak = i;
    }
    g->for_each_point([&](std::size_t i, const Vec3& x) {
      if (i == peak) {
        EXPECT_NEAR(std::sqrt(norm_sq(x)), 0.0, 1e-12);
      }
    });
  }
}

TEST(Rough, ApproximatesContinuumInverseTransform) {
  // At x = 0, g(0) = (2 pi)^{-1} int g_hat(xi) d xi in one dimension.
  const auto g = make_grid(1, 4096, 32.0);
  const auto f = gen_rough(g, 4.0, 1.0);
  double integral = 0.0;
  const double h = 1e-3;
  for (double xi = -400.0; xi < 400.0; xi += h) integral += rough_symbol(Vec3{xi + 0.5 * h, 0, 0}, 4.0, 1);
  integral *= h / (2.0 * std::numbers::pi);
  EXPECT_NEAR(f[2048].real(), integral, 1e-6 * integral);
}

TEST(Rough, HighFrequencyTailDecaysLikeMinusAlpha) {
  const auto g = make_grid(1, 4096, 16.0);
  const std::vector<double> cutoffs{4.0, 8.0, 16.0, 32.0};
  for (double alpha : {4.0, 6.0, 8.0}) {
    const auto f = gen_rough(g, alpha, 0.5);
    std::vector<double> tails;
    for (double n : cutoffs) tails.push_back(l2_norm(project_high(f, n)));
    const double slope = fit_loglog(cutoffs, tails).slope;
    EXPECT_NEAR(slope, -alpha, 0.15 * alpha) << "alpha=" << alpha;
  }
}

TEST(Rough, HAlphaNormStableUnderRefinement) {
  for (double alpha : {4.0, 6.0}) {
    const double coarse = sobolev_norm(gen_rough(make_grid(1, 1024, 16.0), alpha, 0.5), alpha);
    const double fine = sobolev_norm(gen_rough(make_grid(1, 4096, 16.0), alpha, 0.5), alpha);
    EXPECT_NEAR(coarse / fine, 1.0, 0.05) << "alpha=" << alpha;
  }
}

TEST(Rough, AlphaOutsideRangeIsConfigError) {
  const auto g = make_grid(1, 64, 16.0);
  EXPECT_THROW(gen_rough(g, 3.9, 0.5), ConfigError);
  EXPECT_THROW(gen_rough(g, 8.5, 0.5), ConfigError);
  DataSpec d;
  d.family = DataFamily::rough;
  d.alpha = 9.0;
  EXPECT_THROW(d.validate(), ConfigError);
}

TEST(DataSpec, ValidatesParameters) {
  DataSpec d;
  d.delta0 = 0.0;
  EXPECT_THROW(d.validate(), ConfigError);
  d = DataSpec{};
  d.A0 = -1.0;
  EXPECT_THROW(d.validate(), ConfigError);
  d = DataSpec{};
  d.family = DataFamily::file;
  EXPECT_THROW(d.validate(), ConfigError);
  EXPECT_THROW(parse_data_family("sinc"), ConfigError);
  EXPECT_THROW(parse_u1_mode("half"), ConfigError);
}

TEST(InitialData, RelationHoldsByConstruction) {
  const auto g = make_grid(1, 256, 8.0);
  for (U1Mode m : {U1Mode::zero, U1Mode::from_v0}) {
    DataSpec spec;
    spec.u1_mode = m;
    const auto d = make_initial_data(spec, g);
    EXPECT_TRUE(is_real(d.u0));
    EXPECT_TRUE(is_real(d.u1));
    const auto back = (d.u0 - d.u1 * cplx(0.0, 1.0)) * cplx(0.5, 0.0);
    EXPECT_LE(rel_diff(back, d.v0), 1e-15);
  }
}

TEST(InitialData, FromV0ModeSplitsAmplitudeEvenly) {
  const auto g = make_grid(1, 256, 8.0);
  DataSpec spec;
  spec.u1_mode = U1Mode::from_v0;
  const auto d = make_initial_data(spec, g);
  const auto base = gen_gaussian(g, spec.A0, spec.delta0);
  EXPECT_LE(rel_diff(d.u0, base * cplx(std::sqrt(2.0), 0.0)), 1e-15);
  EXPECT_LE(rel_diff(d.u1, base * cplx(std::sqrt(2.0), 0.0)), 1e-15);
}

TEST(InitialData, ScaledDataMatchesDilatedPhysicalData) {
  const auto g = make_grid(1, 512, 16.0);
  const double eps = 0.125;
  const auto sg = scaled_grid(*g, eps);
  for (DataFamily fam : {DataFamily::gaussian, DataFamily::rough}) {
    DataSpec spec;
    spec.family = fam;
    spec.u1_mode = U1Mode::from_v0;
    const auto d = make_initial_data(spec, g);
    const auto s = make_scaled_initial_data(spec, sg, eps);
    // Same sample points: U0(y_j) = eps u0(eps y_j) = eps u0(x_j).
    EXPECT_LE(rel_diff(SpectralField(g, {s.u0.values().begin(), s.u0.values().end()}), d.u0 * cplx(eps, 0.0)), 1e-13)
        << to_string(fam);
    EXPECT_LE(rel_diff(SpectralField(g, {s.u1.values().begin(), s.u1.values().end()}), d.u1 * cplx(eps, 0.0)), 1e-13)
        << to_string(fam);
  }
}

TEST(FileData, RoundTripsThroughFieldDump) {
  std::mt19937 rng(51);
  const auto g = make_grid(2, 32, 5.0);
  const auto v0 = random_bump_field(g, rng, 0.5);
  const auto stem = scratch("v0_roundtrip");
  write_field(stem, v0, 0.5, 0.125);
  const auto desc = read_field_descriptor(stem);
  EXPECT_EQ(desc.dim, 2);
  EXPECT_EQ(desc.points_per_axis, 32u);
  EXPECT_EQ(desc.half_width, 5.0);
  EXPECT_EQ(desc.time, 0.5);
  EXPECT_EQ(desc.eps, 0.125);
  EXPECT_EQ(std::filesystem::file_size(stem.string() + ".bin"), 32u * 32u * 16u);
  DataSpec spec;
  spec.family = DataFamily::file;
  spec.path = stem.string();
  const auto back = make_v0(spec, g);
  for (std::size_t i = 0; i < v0.size(); ++i) ASSERT_EQ(back[i], v0[i]);
}

TEST(FileData, GridMismatchIsConfigError) {
  const auto g = make_grid(1, 32, 5.0);
  const auto stem = scratch("v0_mismatch");
  write_field(stem, SpectralField(g), 0.0, 1.0);
  DataSpec spec;
  spec.family = DataFamily::file;
  spec.path = stem.string();
  EXPECT_THROW(make_v0(spec, make_grid(1, 64, 5.0)), ConfigError);
  EXPECT_THROW(make_v0(spec, g, 0.5), ConfigError);
}

TEST(FileData, MissingOrTruncatedDumpIsIoError) {
  const auto g = make_grid(1, 32, 5.0);
  EXPECT_THROW(read_field(scratch("does_not_exist"), g), IoError);
  const auto stem = scratch("v0_truncated");
  write_field(stem, SpectralField(g), 0.0, 1.0);
  std::filesystem::resize_file(stem.string() + ".bin", 100);
  try {
    read_field(stem, g);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(e.path().find("v0_truncated.bin"), std::string::npos);
  }
}
