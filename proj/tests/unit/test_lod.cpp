// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 thinfilm contributors

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "thinfilm/lod.hpp"

namespace lod = thinfilm::lod;
namespace film = thinfilm::film;

namespace {

lod::LodStudyConfig small_study(lod::Method m, std::size_t trials, std::uint64_t seed = 20240601) {
  auto cfg = lod::default_study(m);
  cfg.n_trials = trials;
  cfg.noise.seed = seed;
  return cfg;
}

bool same(const lod::LodResult& a, const lod::LodResult& b) {
  return a.sigma_blank == b.sigma_blank && a.delta_g == b.delta_g && a.slope == b.slope &&
         a.half_slope == b.half_slope && a.lod_riu == b.lod_riu && a.blank_mean == b.blank_mean &&
         a.shifted_mean == b.shifted_mean;
}

}  // namespace

TEST(LodFrom, ThresholdAlgebra) {
  const double sigma = 2e-3, slope = 49.0;
  const double lod_riu = lod::lod_from(sigma, 0.0, slope);
  EXPECT_NEAR(lod_riu * slope, 3.3 * sigma, 1e-15);
  EXPECT_NEAR(lod::lod_from(sigma, sigma, slope), 2.0 * lod_riu, 1e-15);
}

TEST(Distribution, IawBlankRectifiesNoise) {
  const auto s = lod::response_distribution(small_study(lod::Method::iaw, 100), 0.0, lod::Gradient::none);
  EXPECT_GT(s.mean, 0.0);
  EXPECT_GT(s.std, 0.0);
  EXPECT_EQ(s.n_trials, 100u);
  EXPECT_EQ(s.n_failed, 0u);
}

TEST(Distribution, NoiselessLampBlankIsExactlyZero) {
  auto cfg = small_study(lod::Method::lamp, 10);
  cfg.noise = film::NoiseModel::silent(1);
  const auto s = lod::response_distribution(cfg, 0.0, lod::Gradient::none);
  EXPECT_EQ(s.mean, 0.0);
  EXPECT_EQ(s.std, 0.0);
}

TEST(Distribution, NoisyLampMeanMatchesAnalyticPhase) {
  const auto s = lod::response_distribution(small_study(lod::Method::lamp, 200), 1e-3, lod::Gradient::none);
  const double expected = 2.0 * std::numbers::pi * 4.8 * testing_support::mean_sigma;
  EXPECT_NEAR(s.mean, expected, 0.05 * expected);
}

TEST(GradientDelta, ZeroMagnitudeGivesZero) {
  auto cfg = small_study(lod::Method::iaw, 50);
  cfg.noise.offset_ramp_magnitude = 0.0;
  EXPECT_EQ(lod::gradient_delta(cfg, lod::Gradient::offset), 0.0);
  EXPECT_EQ(lod::gradient_delta(cfg, lod::Gradient::none), 0.0);
}

TEST(GradientDelta, OffsetDominatesIawBlank) {
  lod::LodStudy study(small_study(lod::Method::iaw, 100));
  const auto r = study.lod(lod::Gradient::offset);
  EXPECT_GT(r.delta_g, r.sigma_blank);
}

TEST(LodStudy, GradientNeverImprovesLod) {
  for (auto m : lod::all_methods) {
    lod::LodStudy study(small_study(m, 60));
    const double base = study.lod(lod::Gradient::none).lod_riu;
    EXPECT_LE(base, study.lod(lod::Gradient::offset).lod_riu) << lod::to_string(m);
    EXPECT_LE(base, study.lod(lod::Gradient::amplitude).lod_riu) << lod::to_string(m);
  }
}

TEST(LodStudy, DeterministicAcrossRunsAndThreadCounts) {
  auto cfg = small_study(lod::Method::rifts, 40);
  cfg.threads = 1;
  const auto a = lod::lod_riu(cfg, lod::Gradient::amplitude);
  cfg.threads = 3;
  const auto b = lod::lod_riu(cfg, lod::Gradient::amplitude);
  const auto c = lod::lod_riu(cfg, lod::Gradient::amplitude);
  EXPECT_TRUE(same(a, b));
  EXPECT_TRUE(same(b, c));
}

TEST(LodStudy, DisjointSeedFamiliesAgree) {
  const std::size_t n = 300;
  const double s1 = lod::response_distribution(small_study(lod::Method::lamp, n, 1), 0.0, lod::Gradient::none).std;
  const double s2 = lod::response_distribution(small_study(lod::Method::lamp, n, 2), 0.0, lod::Gradient::none).std;
  // Standard error of a sample std is s / sqrt(2 (n - 1)).
  const double se = 0.5 * (s1 + s2) / std::sqrt(2.0 * static_cast<double>(n - 1));
  EXPECT_LE(std::abs(s1 - s2), 5.0 * std::sqrt(2.0) * se);
}

TEST(LodStudy, NoGradientLodScalesWithNoise) {
  for (auto m : lod::all_methods) {
    auto quiet = small_study(m, 150);
    quiet.noise = film::NoiseModel::white(37.7, 5);
    auto loud = quiet;
    loud.noise = film::NoiseModel::white(17.7, 5);
    const double a = lod::lod_riu(quiet, lod::Gradient::none).lod_riu;
    const double b = lod::lod_riu(loud, lod::Gradient::none).lod_riu;
    EXPECT_NEAR(b / a, 10.0, 3.0) << lod::to_string(m);
  }
}

TEST(LodStudy, TrialCountConsistency) {
  const auto few = lod::lod_riu(small_study(lod::Method::lamp, 100, 77), lod::Gradient::none);
  const auto many = lod::lod_riu(small_study(lod::Method::lamp, 1000, 78), lod::Gradient::none);
  const double se_few = few.lod_riu / std::sqrt(2.0 * 99.0);
  const double se_many = many.lod_riu / std::sqrt(2.0 * 999.0);
  EXPECT_LE(std::abs(few.lod_riu - many.lod_riu), 3.0 * std::hypot(se_few, se_many));
}

TEST(LodStudy, ConfigValidation) {
  auto cfg = small_study(lod::Method::lamp, 1);
  EXPECT_THINFILM_ERROR(lod::LodStudy{cfg}, argument);
  cfg.n_trials = 10;
  cfg.calibration_delta_n = 0.0;
  EXPECT_THINFILM_ERROR(lod::LodStudy{cfg}, argument);
}

TEST(LodStudy, LinearityGuardRejectsNonlinearCalibration) {
  auto cfg = small_study(lod::Method::rifts, 20);
  cfg.linearity_tolerance = 1e-9;
  lod::LodStudy study(cfg);
  EXPECT_THINFILM_ERROR(study.lod(lod::Gradient::none), calibration);
}

TEST(LodTable, SmokeRunPopulatesEveryCell) {
  auto cfg = small_study(lod::Method::lamp, 10);
  const auto t = lod::run_lod_table(cfg);
  EXPECT_GT(t.white_sigma, 0.0);
  EXPECT_GT(t.offset_ramp_magnitude, 0.0);
  EXPECT_GT(t.amplitude_ramp_gain, 0.0);
  for (auto m : lod::all_methods)
    for (auto g : lod::all_gradients) {
      const auto& c = t.at(m, g);
      EXPECT_EQ(c.method, m);
      EXPECT_EQ(c.gradient, g);
      ASSERT_TRUE(c.result.has_value()) << c.error;
      EXPECT_GT(c.result->lod_riu, 0.0);
    }
}

TEST(Methods, NamesRoundTrip) {
  for (auto m : lod::all_methods) EXPECT_EQ(lod::parse_method(lod::to_string(m)), m);
  EXPECT_THINFILM_ERROR(lod::parse_method("fft"), argument);
}
