// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 thinfilm contributors

// Linear average Morlet phase (LAMP).
//
// Each spectrum is resampled linearly onto a uniform wavenumber grid and a
// low-order baseline is subtracted. Its dominant fringe peak (center and FWHM)
// is located in the zero-padded DFT, and a complex Morlet wavelet matched to
// that peak is convolved with the fringes.
// The wavelet is a complex exponential at the fringe frequency under a Gaussian
// envelope, so the convolution is a Gaussian band-pass filter whose complex
// output carries per-point phase and amplitude. Phases are unwrapped, anchored
// to the right 2 pi cycle using the coarse FFT frequency, and the sensing signal
// is the mean phase difference between analyte and reference.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "thinfilm/error.hpp"
#include "thinfilm/fft.hpp"
#include "thinfilm/film_sim.hpp"
#include "thinfilm/grid.hpp"
#include "thinfilm/spectral.hpp"

namespace thinfilm::lamp {

using film::Spectrum;
using cd = std::complex<double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

struct MorletWavelet {
  double center_frequency_nm = 0.0;
  double envelope_sigma = 0.0;  // Gaussian std in nm^-1
  double spacing = 0.0;         // nm^-1, equal to the resampled grid spacing
  std::vector<cd> samples;      // odd length, centered on sample half_length()

  std::size_t half_length() const { return samples.size() / 2; }
};

struct FilteredSpectrum {
  grid::WavenumberGrid grid;
  std::vector<cd> complex_values;
  std::vector<double> phase;      // wrapped, (-pi, pi]
  std::vector<double> amplitude;
};

enum class WaveletSource { per_spectrum, reference };

struct LampConfig {
  grid::WavelengthRange range{};
  std::size_t n_points = 2048;
  unsigned pad_exponent = 0;
  double low_cutoff_nm = 1000.0;
  double max_eot_nm = 50000.0;
  double wavelet_width_scale = 1.0;
  double edge_trim_fraction = 0.0;  // discarded at each end before averaging
  WaveletSource wavelet_source = WaveletSource::per_spectrum;
  // Polynomial baseline removed from the resampled fringes before the peak
  // search and the convolution. With ~4 fringes in range the wavelet is wider
  // than the data, so a smooth baseline leaks into the pass band unless removed.
  grid::Baseline baseline = grid::Baseline::quadratic;

  void validate() const {
    range.validate();
    if (!(wavelet_width_scale > 0.0)) fail(ErrorKind::argument, "lamp: wavelet_width_scale must be positive");
    if (!(edge_trim_fraction >= 0.0 && edge_trim_fraction <= 0.4))
      fail(ErrorKind::argument, "lamp: edge_trim_fraction must lie in [0, 0.4]");
  }
};

// FWHM (frequency domain) -> envelope std in wavenumber: the Gaussian
// exp(-s^2/(2 env^2)) transforms to a Gaussian of std 1/(2 pi env).
inline double envelope_sigma_for_fwhm(double fwhm_nm) {
  return 2.0 * std::sqrt(2.0 * std::numbers::ln2) / (two_pi * fwhm_nm);
}

inline MorletWavelet design_wavelet(const spectral::PeakInfo& peak, double delta_sigma, double width_scale = 1.0) {
  if (!(peak.fwhm_nm > 0.0)) fail(ErrorKind::argument, "design_wavelet: FWHM must be positive");
  if (!(delta_sigma > 0.0)) fail(ErrorKind::argument, "design_wavelet: delta_sigma must be positive");
  if (!(width_scale > 0.0)) fail(ErrorKind::argument, "design_wavelet: width_scale must be positive");
  MorletWavelet w;
  w.center_frequency_nm = peak.center_frequency_nm;
  w.envelope_sigma = envelope_sigma_for_fwhm(width_scale * peak.fwhm_nm);
  w.spacing = delta_sigma;
  const auto half = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(4.0 * w.envelope_sigma / delta_sigma)));
  w.samples.resize(2 * half + 1);
  double energy = 0.0;
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    const double s = (static_cast<double>(i) - static_cast<double>(half)) * delta_sigma;
    const double env = std::exp(-s * s / (2.0 * w.envelope_sigma * w.envelope_sigma));
    w.samples[i] = env * std::polar(1.0, two_pi * w.center_frequency_nm * s);
    energy += env * env;
  }
  const double norm = 1.0 / std::sqrt(energy * delta_sigma);
  for (cd& v : w.samples) v *= norm;
  return w;
}

// "Same"-extent complex convolution of the mean-removed fringes with the
// wavelet; samples outside the grid are treated as zero.
inline FilteredSpectrum filter_spectrum(const grid::ResampledSpectrum& resampled, const MorletWavelet& wavelet) {
  const double ds = resampled.grid.spacing();
  if (std::abs(wavelet.spacing - ds) > 1e-12 * ds)
    fail(ErrorKind::argument, "filter_spectrum: wavelet spacing differs from the grid spacing");
  const std::size_t n = resampled.values.size();
  const std::size_t taps = wavelet.samples.size();
  const std::size_t half = wavelet.half_length();

  double mean = 0.0;
  for (double v : resampled.values) mean += v;
  mean /= static_cast<double>(n);

  const std::size_t len = fft::next_power_of_two(n + taps - 1);
  std::vector<cd> x(len, {0.0, 0.0});
  std::vector<cd> h(len, {0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) x[i] = resampled.values[i] - mean;
  std::copy(wavelet.samples.begin(), wavelet.samples.end(), h.begin());
  fft::complex_transform(x, -1);
  fft::complex_transform(h, -1);
  for (std::size_t i = 0; i < len; ++i) x[i] *= h[i];
  fft::complex_transform(x, +1);

  FilteredSpectrum out{resampled.grid, std::vector<cd>(n), std::vector<double>(n), std::vector<double>(n)};
  const double scale = 1.0 / static_cast<double>(len);
  for (std::size_t i = 0; i < n; ++i) {
    const cd v = x[i + half] * scale;
    out.complex_values[i] = v;
    out.phase[i] = std::arg(v);
    out.amplitude[i] = std::abs(v);
  }
  return out;
}

// Amplitude-normalized fringes, cos(phase).
inline std::vector<double> normalize_fringes(const FilteredSpectrum& filtered) {
  std::vector<double> out(filtered.complex_values.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(filtered.amplitude[i] >= 1e-12))
      fail(ErrorKind::degenerate_amplitude, "normalize_fringes: amplitude vanishes at point " + std::to_string(i));
    out[i] = filtered.complex_values[i].real() / filtered.amplitude[i];
  }
  return out;
}

// Adds 2 pi k_i to each sample so successive differences lie within [-pi, pi].
inline std::vector<double> unwrap_phase(std::span<const double> wrapped) {
  if (wrapped.size() < 2) fail(ErrorKind::argument, "unwrap_phase: need at least 2 samples");
  std::vector<double> out(wrapped.size());
  out[0] = wrapped[0];
  double cycles = 0.0;
  for (std::size_t i = 1; i < wrapped.size(); ++i) {
    cycles -= std::round((wrapped[i] - wrapped[i - 1]) / two_pi);
    out[i] = wrapped[i] + two_pi * cycles;
  }
  return out;
}

// Shifts by the whole number of cycles that brings the first sample within pi
// of target_phase.
inline std::vector<double> anchor_to_phase(std::span<const double> unwrapped, double target_phase) {
  if (unwrapped.empty()) return {};
  const double cycles = std::round((target_phase - unwrapped[0]) / two_pi);
  std::vector<double> out(unwrapped.begin(), unwrapped.end());
  if (cycles != 0.0)
    for (double& v : out) v += two_pi * cycles;
  return out;
}

// Absolute anchoring: the phase at sigma_min should sit near 2 pi EOT sigma_min.
inline std::vector<double> anchor_cycle(std::span<const double> unwrapped, double coarse_eot_nm, double sigma_min) {
  return anchor_to_phase(unwrapped, two_pi * coarse_eot_nm * sigma_min);
}

struct PhaseTrace {
  grid::WavenumberGrid grid;
  spectral::PeakInfo peak;
  MorletWavelet wavelet;
  FilteredSpectrum filtered;
  std::vector<double> phase;  // unwrapped and cycle-anchored
};

inline spectral::PeakInfo lamp_peak(const grid::ResampledSpectrum& resampled, const LampConfig& cfg) {
  const double ds = resampled.grid.spacing();
  std::vector<double> centered = resampled.values;
  double mean = 0.0;
  for (double v : centered) mean += v;
  mean /= static_cast<double>(centered.size());
  for (double& v : centered) v -= mean;
  const std::size_t padded = grid::pad_length_for(centered.size(), ds, cfg.pad_exponent);
  const auto fs = spectral::dft_band(centered, ds, padded, cfg.max_eot_nm);
  return spectral::dominant_peak(fs, cfg.low_cutoff_nm, false);
}

// Band-pass filtering and phase extraction for one spectrum. When `wavelet` is
// given it replaces the peak-matched design.
inline PhaseTrace lamp_phase(const Spectrum& spectrum, const LampConfig& cfg, const MorletWavelet* wavelet = nullptr) {
  cfg.validate();
  auto resampled = grid::to_wavenumber(spectrum, cfg.range, cfg.n_points, grid::Interpolation::linear);
  resampled.values = grid::remove_baseline(resampled.values, cfg.baseline);
  const auto peak = lamp_peak(resampled, cfg);
  MorletWavelet w = wavelet ? *wavelet : design_wavelet(peak, resampled.grid.spacing(), cfg.wavelet_width_scale);
  auto filtered = filter_spectrum(resampled, w);
  auto unwrapped = unwrap_phase(filtered.phase);
  auto anchored = anchor_cycle(unwrapped, peak.center_frequency_nm, resampled.grid.sigma_min());
  return PhaseTrace{resampled.grid, peak, std::move(w), std::move(filtered), std::move(anchored)};
}

inline double lamp_to_delta_eot(double mean_phase, const grid::WavenumberGrid& grid) {
  return mean_phase / (two_pi * grid.mean_sigma());
}

struct LampResult {
  double mean_phase_rad = 0.0;
  double delta_eot_nm = 0.0;
};

// Mean of (analyte - reference) phase over the edge-trimmed grid. The analyte
// cycle is anchored against the reference phase plus the coarse FFT estimate of
// the phase change, so a fringe offset near pi cannot flip one spectrum alone.
inline LampResult lamp_compare(const PhaseTrace& reference, const PhaseTrace& analyte, const LampConfig& cfg) {
  if (!(reference.grid == analyte.grid)) fail(ErrorKind::alignment, "lamp: traces use different grids");
  const double coarse = two_pi * (analyte.peak.center_frequency_nm - reference.peak.center_frequency_nm) *
                        reference.grid.sigma_min();
  const auto phase = anchor_to_phase(analyte.phase, reference.phase[0] + coarse);
  const std::size_t n = phase.size();
  const auto trim = static_cast<std::size_t>(std::floor(cfg.edge_trim_fraction * static_cast<double>(n)));
  double acc = 0.0;
  for (std::size_t i = trim; i < n - trim; ++i) acc += phase[i] - reference.phase[i];
  LampResult out;
  out.mean_phase_rad = acc / static_cast<double>(n - 2 * trim);
  out.delta_eot_nm = lamp_to_delta_eot(out.mean_phase_rad, reference.grid);
  return out;
}

inline PhaseTrace lamp_analyte_phase(const PhaseTrace& reference, const Spectrum& analyte, const LampConfig& cfg) {
  return lamp_phase(analyte, cfg, cfg.wavelet_source == WaveletSource::reference ? &reference.wavelet : nullptr);
}

inline LampResult lamp_result(const Spectrum& reference, const Spectrum& analyte, const LampConfig& cfg = {}) {
  const auto ref = lamp_phase(reference, cfg);
  return lamp_compare(ref, lamp_analyte_phase(ref, analyte, cfg), cfg);
}

// Mean phase difference in radians; positive for increased optical thickness.
inline double lamp_signal(const Spectrum& reference, const Spectrum& analyte, const LampConfig& cfg = {}) {
  return lamp_result(reference, analyte, cfg).mean_phase_rad;
}

}  // namespace thinfilm::lamp
