// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 thinfilm contributors

#include "support.hpp"
#include "thinfilm/legacy.hpp"

namespace legacy = thinfilm::legacy;
namespace film = thinfilm::film;
using testing_support::default_spectrum;

TEST(Rifts, RecoversDefaultOpticalThickness) { EXPECT_NEAR(legacy::rifts_eot(default_spectrum()), 5760.0, 2.0); }

TEST(Rifts, ScaleInvariant) {
  const auto s = default_spectrum();
  EXPECT_EQ(legacy::rifts_eot(s), legacy::rifts_eot(s.scaled(10.0)));
}

TEST(Rifts, ShiftForIndexChange) {
  const double shift = legacy::rifts_eot(default_spectrum(0.01)) - legacy::rifts_eot(default_spectrum());
  EXPECT_NEAR(shift, 48.0, 3.0);
}

TEST(Rifts, NaturalSplineBoundaryAgreesOnSmoothFringes) {
  legacy::RiftsConfig cfg;
  cfg.spline_boundary = thinfilm::grid::SplineBoundary::natural;
  EXPECT_NEAR(legacy::rifts_eot(default_spectrum(), cfg), 5760.0, 2.0);
}

TEST(Rifts, FlatSpectrumHasNoFringePeak) {
  const auto wl = film::default_wavelengths();
  EXPECT_THINFILM_ERROR(legacy::rifts_eot(film::Spectrum(wl, std::vector<double>(wl.size(), 0.3))), no_fringe_peak);
}

TEST(Iaw, IdenticalSpectraGiveZero) {
  const auto s = default_spectrum();
  EXPECT_EQ(legacy::iaw(s, s), 0.0);
}

TEST(Iaw, ConstantOffsetIsRemoved) {
  const auto s = default_spectrum();
  auto r = s.reflectance();
  for (double& v : r) v += 0.05;
  EXPECT_NEAR(legacy::iaw(s, s.with_reflectance(r)), 0.0, 1e-15);
}

TEST(Iaw, IncreasesWithSmallIndexChanges) {
  const auto ref = default_spectrum();
  double prev = 0.0;
  for (int k = 1; k <= 10; ++k) {
    const double v = legacy::iaw(ref, default_spectrum(1e-4 * k));
    EXPECT_GT(v, prev) << "delta_n=" << 1e-4 * k;
    prev = v;
  }
}

TEST(Iaw, SumRuleIsMeanTimesCount) {
  const auto ref = default_spectrum();
  const auto ana = default_spectrum(1e-3);
  legacy::IawConfig sum{{}, legacy::IawRule::sum_abs};
  EXPECT_NEAR(legacy::iaw(ref, ana, sum), legacy::iaw(ref, ana) * static_cast<double>(ref.size()), 1e-12);
}

TEST(Iaw, FoldsOverBeyondHalfFreeSpectralRange) {
  const auto ref = default_spectrum();
  const double limit = legacy::iaw_fold_limit_eot_nm({});
  EXPECT_DOUBLE_EQ(limit, 250.0);
  // Sweep the EOT change to twice the limit; the response must stop rising.
  const double eot = film::FilmStack{}.optical_thickness_nm();
  std::vector<double> response;
  for (int k = 1; k <= 80; ++k) {
    const double delta_eot = 2.0 * limit * k / 80.0;
    response.push_back(legacy::iaw(ref, default_spectrum(1.2 * delta_eot / eot)));
  }
  const auto peak = std::max_element(response.begin(), response.end()) - response.begin();
  EXPECT_LT(peak, 79);
  EXPECT_LT(response.back(), response[static_cast<std::size_t>(peak)]);
}

TEST(Iaw, MismatchedGridsAreAlignmentErrors) {
  const auto a = default_spectrum();
  const auto b = film::simulate_reflectance(film::FilmStack{}, film::uniform_wavelengths(500, 800, 1.0));
  EXPECT_THINFILM_ERROR(legacy::iaw(a, b), alignment);
}

TEST(Iaw, EmptyRangeIsRangeError) {
  const auto a = default_spectrum();
  EXPECT_THINFILM_ERROR(legacy::iaw(a, a, {{900.0, 950.0}}), range);
}
