// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 thinfilm contributors

// Single-layer thin-film reflectance: the analytic Fabry-Perot etalon, the
// normal-incidence characteristic-matrix model and the three noise regimes
// (white Gaussian noise, linear offset ramp, linear amplitude ramp).

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "thinfilm/error.hpp"

namespace thinfilm::film {

struct FilmStack {
  double ambient_index = 1.0;
  double film_index = 1.2;
  double film_thickness_nm = 2400.0;
  // Dispersionless silicon near 650 nm.
  std::complex<double> substrate_index{3.67, 0.0};

  // Fringe frequency on the wavenumber axis, 2nL.
  double optical_thickness_nm() const { return 2.0 * film_index * film_thickness_nm; }

  FilmStack with_index_change(double delta_n) const {
    FilmStack out = *this;
    out.film_index += delta_n;
    return out;
  }

  void validate() const {
    if (!(film_thickness_nm > 0.0) || !std::isfinite(film_thickness_nm))
      fail(ErrorKind::argument, "film thickness must be positive");
    if (!(ambient_index >= 1.0) || !(film_index >= 1.0) || !(substrate_index.real() >= 1.0))
      fail(ErrorKind::argument, "refractive index real parts must be >= 1");
    if (substrate_index.imag() < 0.0)
      fail(ErrorKind::argument, "substrate extinction coefficient must be >= 0");
  }
};

// Reflectance sampled on a strictly ascending wavelength grid.
class Spectrum {
 public:
  Spectrum(std::vector<double> wavelengths_nm, std::vector<double> reflectance)
      : wavelengths_(std::move(wavelengths_nm)), reflectance_(std::move(reflectance)) {
    if (wavelengths_.size() != reflectance_.size())
      fail(ErrorKind::argument, "spectrum: wavelength and reflectance lengths differ");
    if (wavelengths_.size() < 4)
      fail(ErrorKind::argument, "spectrum: at least 4 samples required");
    for (std::size_t i = 0; i < wavelengths_.size(); ++i) {
      if (!std::isfinite(wavelengths_[i]) || !std::isfinite(reflectance_[i]))
        fail(ErrorKind::argument, "spectrum: non-finite value at sample " + std::to_string(i));
      if (i > 0 && !(wavelengths_[i] > wavelengths_[i - 1]))
        fail(ErrorKind::argument,
             "spectrum: wavelengths must be strictly ascending (sample " + std::to_string(i) + ")");
    }
  }

  const std::vector<double>& wavelengths_nm() const { return wavelengths_; }
  const std::vector<double>& reflectance() const { return reflectance_; }
  std::size_t size() const { return wavelengths_.size(); }
  double min_wavelength() const { return wavelengths_.front(); }
  double max_wavelength() const { return wavelengths_.back(); }

  bool same_grid(const Spectrum& other) const { return wavelengths_ == other.wavelengths_; }

  Spectrum with_reflectance(std::vector<double> reflectance) const {
    return Spectrum(wavelengths_, std::move(reflectance));
  }

  Spectrum scaled(double factor) const {
    std::vector<double> r = reflectance_;
    for (double& v : r) v *= factor;
    return with_reflectance(std::move(r));
  }

  friend bool operator==(const Spectrum&, const Spectrum&) = default;

 private:
  std::vector<double> wavelengths_;
  std::vector<double> reflectance_;
};

struct NoiseModel {
  // Exactly one of these selects the white-noise level.
  std::optional<double> target_snr_db;
  std::optional<double> gaussian_sigma;
  double offset_ramp_magnitude = 0.0;
  double amplitude_ramp_gain = 0.0;
  std::uint64_t seed = 0;

  static NoiseModel silent(std::uint64_t seed = 0) {
    NoiseModel m;
    m.gaussian_sigma = 0.0;
    m.seed = seed;
    return m;
  }

  static NoiseModel white(double snr_db, std::uint64_t seed) {
    NoiseModel m;
    m.target_snr_db = snr_db;
    m.seed = seed;
    return m;
  }

  void validate() const {
    if (target_snr_db.has_value() == gaussian_sigma.has_value())
      fail(ErrorKind::argument, "noise model: exactly one of target_snr_db / gaussian_sigma must be set");
    if (target_snr_db && !std::isfinite(*target_snr_db))
      fail(ErrorKind::argument, "noise model: target_snr_db must be finite");
    if (gaussian_sigma && !(*gaussian_sigma >= 0.0))
      fail(ErrorKind::argument, "noise model: gaussian_sigma must be >= 0");
    if (!(offset_ramp_magnitude >= 0.0) || !(amplitude_ramp_gain >= 0.0))
      fail(ErrorKind::argument, "noise model: ramp magnitudes must be >= 0");
  }
};

// splitmix64 finalizer; maps (master seed, stream index) to independent seeds.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double fabry_perot_reflectance(double single_interface_reflectance, double round_trip_phase) {
  const double r = single_interface_reflectance;
  if (!(r >= 0.0 && r < 1.0))
    fail(ErrorKind::domain, "fabry_perot_reflectance: R must lie in [0, 1)");
  if (!std::isfinite(round_trip_phase))
    fail(ErrorKind::domain, "fabry_perot_reflectance: phase must be finite");
  const double c = std::cos(round_trip_phase);
  return 2.0 * r * (1.0 - c) / (1.0 - 2.0 * r * c + r * r);
}

inline std::vector<double> uniform_wavelengths(double start_nm, double stop_nm, double step_nm) {
  if (!(step_nm > 0.0) || !(stop_nm > start_nm))
    fail(ErrorKind::argument, "uniform_wavelengths: need start < stop and step > 0");
  const auto n = static_cast<std::size_t>(std::floor((stop_nm - start_nm) / step_nm + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = start_nm + step_nm * static_cast<double>(i);
  return out;
}

// 500-800 nm at 0.5 nm, a typical CCD spectrometer pixel pitch. The white-noise
// floor of every method scales with 1/sqrt(sample count).
inline std::vector<double> default_wavelengths() { return uniform_wavelengths(500.0, 800.0, 0.5); }

// Normal-incidence reflectance of ambient / film / substrate by the
// single-layer characteristic matrix.
inline double stack_reflectance(const FilmStack& stack, double wavelength_nm) {
  stack.validate();
  using cd = std::complex<double>;
  const double n0 = stack.ambient_index;
  const double n1 = stack.film_index;
  const cd ns = stack.substrate_index;
  const double delta = 2.0 * std::numbers::pi * n1 * stack.film_thickness_nm / wavelength_nm;
  const double c = std::cos(delta);
  const double s = std::sin(delta);
  const cd m11{c, 0.0};
  const cd m12{0.0, s / n1};
  const cd m21{0.0, n1 * s};
  const cd m22{c, 0.0};
  const cd num = n0 * m11 + n0 * ns * m12 - m21 - ns * m22;
  const cd den = n0 * m11 + n0 * ns * m12 + m21 + ns * m22;
  return std::norm(num / den);
}

inline Spectrum simulate_reflectance(const FilmStack& stack, std::span<const double> wavelengths_nm) {
  stack.validate();
  if (wavelengths_nm.empty()) fail(ErrorKind::argument, "simulate_reflectance: empty wavelength list");
  std::vector<double> wl(wavelengths_nm.begin(), wavelengths_nm.end());
  std::vector<double> r(wl.size());
  for (std::size_t i = 0; i < wl.size(); ++i) {
    if (!(wl[i] >= 200.0 && wl[i] <= 2000.0))
      fail(ErrorKind::range, "simulate_reflectance: wavelengths must lie within [200, 2000] nm");
    r[i] = stack_reflectance(stack, wl[i]);
  }
  return Spectrum(std::move(wl), std::move(r));
}

// Mean squared deviation from the mean.
inline double ac_power(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(values.size());
}

inline double white_sigma_for_snr(const Spectrum& clean, double snr_db) {
  return std::sqrt(ac_power(clean.reflectance()) / std::pow(10.0, snr_db / 10.0));
}

// Linear 0 -> 1 ramp from the first to the last wavelength.
inline double ramp_position(const Spectrum& s, std::size_t i) {
  return (s.wavelengths_nm()[i] - s.min_wavelength()) / (s.max_wavelength() - s.min_wavelength());
}

inline Spectrum add_noise(const Spectrum& clean, const NoiseModel& model) {
  model.validate();
  const double sigma =
      model.gaussian_sigma ? *model.gaussian_sigma : white_sigma_for_snr(clean, *model.target_snr_db);
  const auto& r = clean.reflectance();
  std::vector<double> out(r.size());
  std::mt19937_64 rng(model.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double t = ramp_position(clean, i);
    double v = r[i];
    if (model.amplitude_ramp_gain != 0.0) v *= 1.0 + model.amplitude_ramp_gain * t;
    if (model.offset_ramp_magnitude != 0.0) v += model.offset_ramp_magnitude * t;
    // One draw per sample regardless of sigma keeps streams aligned across models.
    const double z = gauss(rng);
    if (sigma != 0.0) v += sigma * z;
    out[i] = v;
  }
  return clean.with_reflectance(std::move(out));
}

// 10 log10(AC power of clean / mean square of (noisy - clean)).
// nullopt means the spectra are identical: no noise, infinite S/N.
inline std::optional<double> measure_snr(const Spectrum& clean, const Spectrum& noisy) {
  if (!clean.same_grid(noisy)) fail(ErrorKind::alignment, "measure_snr: spectra are on different grids");
  const auto& a = clean.reflectance();
  const auto& b = noisy.reflectance();
  double noise = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) noise += (b[i] - a[i]) * (b[i] - a[i]);
  noise /= static_cast<double>(a.size());
  if (noise == 0.0) return std::nullopt;
  return 10.0 * std::log10(ac_power(a) / noise);
}

enum class RampKind { offset, amplitude };

// Bisects on the ramp magnitude until measure_snr(clean, add_noise(clean, m))
// equals target_db, with the white-noise part of `white` (and its seed) in place.
inline double calibrate_ramp(const Spectrum& clean, const NoiseModel& white, RampKind kind, double target_db) {
  auto snr_at = [&](double magnitude) {
    NoiseModel m = white;
    m.offset_ramp_magnitude = kind == RampKind::offset ? magnitude : 0.0;
    m.amplitude_ramp_gain = kind == RampKind::amplitude ? magnitude : 0.0;
    const auto snr = measure_snr(clean, add_noise(clean, m));
    return snr ? *snr : std::numeric_limits<double>::infinity();
  };
  if (!(snr_at(0.0) > target_db))
    fail(ErrorKind::calibration, "calibrate_ramp: white noise alone is already below the target S/N");
  double lo = 0.0;
  double hi = 1e-3;
  while (snr_at(hi) > target_db) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) fail(ErrorKind::calibration, "calibrate_ramp: target S/N unreachable");
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (snr_at(mid) > target_db ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace thinfilm::film
