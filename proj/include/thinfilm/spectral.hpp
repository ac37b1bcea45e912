// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 thinfilm contributors

// Discrete Fourier analysis of wavenumber-domain fringes. Frequencies live on
// the effective-optical-thickness axis: bin m of an N-point transform over
// spacing d sigma sits at m / (N d sigma) nm.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <tuple>
#include <vector>

#include "thinfilm/error.hpp"
#include "thinfilm/fft.hpp"

namespace thinfilm::spectral {

struct FrequencySpectrum {
  std::vector<double> frequencies_nm;
  std::vector<std::complex<double>> amplitudes;
  // Length of the (padded) transform the bins were taken from.
  std::size_t transform_length = 0;

  double bin_width_nm() const { return frequencies_nm.size() > 1 ? frequencies_nm[1] : 0.0; }
};

struct PeakInfo {
  double center_frequency_nm = 0.0;
  double fwhm_nm = 0.0;
  double peak_power = 0.0;
};

namespace detail {

inline FrequencySpectrum make_spectrum(std::vector<std::complex<double>> bins, std::size_t n, double delta_sigma) {
  FrequencySpectrum fs;
  fs.transform_length = n;
  fs.frequencies_nm.resize(bins.size());
  const double df = 1.0 / (static_cast<double>(n) * delta_sigma);
  for (std::size_t m = 0; m < bins.size(); ++m) fs.frequencies_nm[m] = df * static_cast<double>(m);
  fs.amplitudes = std::move(bins);
  return fs;
}

// exp(-i pi q^2 / n), with q^2 reduced mod 2n in integer arithmetic so large
// indices keep full phase precision.
inline std::complex<double> chirp(std::uint64_t q, std::uint64_t n) {
  const std::uint64_t r = (q % (2 * n)) * (q % (2 * n)) % (2 * n);
  const double angle = std::numbers::pi * static_cast<double>(r) / static_cast<double>(n);
  return {std::cos(angle), -std::sin(angle)};
}

// Precomputed Bluestein kernels for the first `bins` outputs of an
// `length`-point DFT of an `input`-sample sequence.
struct ChirpPlan {
  std::size_t input = 0;
  std::size_t bins = 0;
  std::size_t length = 0;
  std::size_t conv_length = 0;
  std::vector<std::complex<double>> pre;
  std::vector<std::complex<double>> post;
  std::vector<std::complex<double>> kernel_fft;
};

inline std::shared_ptr<const ChirpPlan> chirp_plan(std::size_t input, std::size_t bins, std::size_t length) {
  static std::mutex mutex;
  static std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::shared_ptr<const ChirpPlan>> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_tuple(input, bins, length);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  auto plan = std::make_shared<ChirpPlan>();
  plan->input = input;
  plan->bins = bins;
  plan->length = length;
  plan->conv_length = fft::next_power_of_two(input + bins - 1);
  plan->pre.resize(input);
  for (std::size_t n = 0; n < input; ++n) plan->pre[n] = chirp(n, length);
  plan->post.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) plan->post[k] = chirp(k, length);
  std::vector<std::complex<double>> kernel(plan->conv_length, {0.0, 0.0});
  for (std::size_t m = 0; m < bins; ++m) kernel[m] = std::conj(chirp(m, length));
  for (std::size_t m = 1; m < input; ++m) kernel[plan->conv_length - m] = std::conj(chirp(m, length));
  fft::complex_transform(kernel, -1);
  plan->kernel_fft = std::move(kernel);
  cache.emplace(key, plan);
  return plan;
}

}  // namespace detail

// Forward DFT (unnormalized, exp(-2 pi i m n / N)) of `values` as given.
inline FrequencySpectrum dft(std::span<const double> values, double delta_sigma) {
  if (values.size() < 16) fail(ErrorKind::argument, "dft: need at least 16 samples");
  if (!(delta_sigma > 0.0)) fail(ErrorKind::argument, "dft: delta_sigma must be positive");
  return detail::make_spectrum(fft::real_forward(values, values.size()), values.size(), delta_sigma);
}

// The first bins (frequencies <= max_frequency_nm) of the DFT of `values`
// zero-padded to padded_length. Equal to the corresponding bins of
// dft(zero_pad(values, padded_length)), computed by the chirp-z transform when
// that is cheaper than the full padded FFT.
inline FrequencySpectrum dft_band(std::span<const double> values, double delta_sigma, std::size_t padded_length,
                                  double max_frequency_nm) {
  if (values.size() < 16) fail(ErrorKind::argument, "dft: need at least 16 samples");
  if (!(delta_sigma > 0.0)) fail(ErrorKind::argument, "dft: delta_sigma must be positive");
  if (padded_length < values.size()) fail(ErrorKind::argument, "dft: padded length shorter than input");
  if (!(max_frequency_nm > 0.0)) fail(ErrorKind::argument, "dft: max_frequency_nm must be positive");
  const double df = 1.0 / (static_cast<double>(padded_length) * delta_sigma);
  const std::size_t half = padded_length / 2 + 1;
  const auto wanted = static_cast<std::size_t>(std::min<double>(
      static_cast<double>(half), std::floor(max_frequency_nm / df) + 2.0));
  const std::size_t bins = std::max<std::size_t>(wanted, 2);

  if (4 * (values.size() + bins) >= padded_length) {
    auto all = fft::real_forward(values, padded_length);
    all.resize(bins);
    return detail::make_spectrum(std::move(all), padded_length, delta_sigma);
  }

  const auto plan = detail::chirp_plan(values.size(), bins, padded_length);
  std::vector<std::complex<double>> work(plan->conv_length, {0.0, 0.0});
  for (std::size_t n = 0; n < values.size(); ++n) work[n] = values[n] * plan->pre[n];
  fft::complex_transform(work, -1);
  for (std::size_t i = 0; i < work.size(); ++i) work[i] *= plan->kernel_fft[i];
  fft::complex_transform(work, +1);
  const double scale = 1.0 / static_cast<double>(plan->conv_length);
  std::vector<std::complex<double>> out(bins);
  for (std::size_t k = 0; k < bins; ++k) out[k] = plan->post[k] * work[k] * scale;
  return detail::make_spectrum(std::move(out), padded_length, delta_sigma);
}

// Dominant fringe peak: the largest local maximum of |amplitude| above
// low_cutoff_nm. FWHM is measured on magnitude with linear interpolation of the
// half-maximum crossings.
inline PeakInfo dominant_peak(const FrequencySpectrum& fs, double low_cutoff_nm, bool refine = false) {
  if (!(low_cutoff_nm >= 0.0)) fail(ErrorKind::argument, "dominant_peak: low cutoff must be >= 0");
  const std::size_t n = fs.amplitudes.size();
  if (n < 3 || fs.frequencies_nm.size() != n) fail(ErrorKind::argument, "dominant_peak: spectrum too short");

  std::vector<double> mag(n);
  double global = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mag[i] = std::abs(fs.amplitudes[i]);
    global = std::max(global, mag[i]);
  }
  const double floor = 1e-9 * global;
  std::size_t best = 0;
  bool found = false;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(fs.frequencies_nm[i] > low_cutoff_nm)) continue;
    if (mag[i] > mag[i - 1] && mag[i] >= mag[i + 1] && mag[i] > floor && (!found || mag[i] > mag[best])) {
      best = i;
      found = true;
    }
  }
  if (!found) fail(ErrorKind::no_fringe_peak, "no fringe peak above the low cutoff");

  const double half = 0.5 * mag[best];
  auto crossing = [&](std::size_t inside, std::size_t outside) {
    const double t = (half - mag[inside]) / (mag[outside] - mag[inside]);
    return fs.frequencies_nm[inside] + t * (fs.frequencies_nm[outside] - fs.frequencies_nm[inside]);
  };
  double left = -1.0, right = -1.0;
  for (std::size_t j = best; j-- > 0;) {
    if (mag[j] < half) {
      left = fs.frequencies_nm[best] - crossing(j + 1, j);
      break;
    }
  }
  for (std::size_t j = best + 1; j < n; ++j) {
    if (mag[j] < half) {
      right = crossing(j - 1, j) - fs.frequencies_nm[best];
      break;
    }
  }
  if (left < 0.0 && right < 0.0) fail(ErrorKind::no_fringe_peak, "fringe peak has no half-maximum crossing");
  if (left < 0.0) left = right;
  if (right < 0.0) right = left;

  PeakInfo info;
  info.center_frequency_nm = fs.frequencies_nm[best];
  info.fwhm_nm = left + right;
  info.peak_power = mag[best] * mag[best];
  if (refine && mag[best - 1] > 0.0 && mag[best + 1] > 0.0) {
    const double a = std::log(mag[best - 1]);
    const double b = std::log(mag[best]);
    const double c = std::log(mag[best + 1]);
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) {
      const double delta = 0.5 * (a - c) / denom;
      info.center_frequency_nm += delta * fs.bin_width_nm();
    }
  }
  return info;
}

}  // namespace thinfilm::spectral
