// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 thinfilm contributors

// Baseline pipelines: RIFTS (optical thickness from the windowed FFT peak) and
// IAW (mean absolute zeroed interferogram).

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "thinfilm/error.hpp"
#include "thinfilm/film_sim.hpp"
#include "thinfilm/grid.hpp"
#include "thinfilm/spectral.hpp"

namespace thinfilm::legacy {

using film::Spectrum;

struct RiftsConfig {
  grid::WavelengthRange range{};
  std::size_t n_points = 2048;
  unsigned pad_exponent = 0;  // 0: smallest power of two with <= 1.5 nm bins
  double low_cutoff_nm = 1000.0;
  double max_eot_nm = 50000.0;
  bool refine_peak = false;
  grid::SplineBoundary spline_boundary = grid::SplineBoundary::not_a_knot;
  grid::Baseline baseline = grid::Baseline::mean;
};

enum class IawRule { mean_abs, sum_abs };

struct IawConfig {
  grid::WavelengthRange range{};
  IawRule rule = IawRule::mean_abs;
};

inline spectral::PeakInfo rifts_peak(const Spectrum& spectrum, const RiftsConfig& cfg) {
  const auto resampled =
      grid::to_wavenumber(spectrum, cfg.range, cfg.n_points, grid::Interpolation::cubic_spline, cfg.spline_boundary);
  const double ds = resampled.grid.spacing();
  // Baseline removed before windowing; the fringe peak sits a few bins from DC.
  const auto detrended = grid::remove_baseline(resampled.values, cfg.baseline);
  double scale = 0.0, residual = 0.0;
  for (std::size_t k = 0; k < detrended.size(); ++k) {
    scale = std::max(scale, std::abs(resampled.values[k]));
    residual = std::max(residual, std::abs(detrended[k]));
  }
  // Rounding residue of a featureless spectrum must not be read as fringes.
  if (!(residual > 1e-12 * scale)) fail(ErrorKind::no_fringe_peak, "rifts: spectrum has no fringe modulation");
  const auto windowed = grid::hann_window(detrended);
  const std::size_t padded = grid::pad_length_for(windowed.size(), ds, cfg.pad_exponent);
  const auto fs = spectral::dft_band(windowed, ds, padded, cfg.max_eot_nm);
  return spectral::dominant_peak(fs, cfg.low_cutoff_nm, cfg.refine_peak);
}

// Effective optical thickness 2nL in nm.
inline double rifts_eot(const Spectrum& spectrum, const RiftsConfig& cfg = {}) {
  return rifts_peak(spectrum, cfg).center_frequency_nm;
}

inline double iaw(const Spectrum& reference, const Spectrum& analyte, const IawConfig& cfg = {}) {
  cfg.range.validate();
  if (!reference.same_grid(analyte))
    fail(ErrorKind::alignment, "iaw: reference and analyte are sampled on different wavelength grids");
  const auto& wl = reference.wavelengths_nm();
  const auto& a = analyte.reflectance();
  const auto& r = reference.reflectance();
  std::vector<double> d;
  d.reserve(wl.size());
  for (std::size_t i = 0; i < wl.size(); ++i)
    if (wl[i] >= cfg.range.lo_nm && wl[i] <= cfg.range.hi_nm) d.push_back(a[i] - r[i]);
  if (d.empty()) fail(ErrorKind::range, "iaw: no samples inside the spectral range");
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= static_cast<double>(d.size());
  double acc = 0.0;
  for (double v : d) acc += std::abs(v - mean);
  return cfg.rule == IawRule::mean_abs ? acc / static_cast<double>(d.size()) : acc;
}

// Optical-thickness change at which the analyte fringes at the short-wavelength
// end have moved half a period (half the free spectral range); difference-based
// signals fold over beyond it.
inline double iaw_fold_limit_eot_nm(const grid::WavelengthRange& range) { return 0.5 * range.lo_nm; }

}  // namespace thinfilm::legacy
