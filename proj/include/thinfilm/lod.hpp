// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 thinfilm contributors

// Monte-Carlo limit of detection in refractive-index units.
//
// A clean reference spectrum is compared against n_trials noisy analyte
// spectra. The blank distribution (no index change) gives sigma_blank, a
// shifted distribution at calibration_delta_n gives the response slope, and a
// systematic gradient (offset or amplitude ramp on the analyte) contributes
// delta_g, the shift it causes in the blank mean. The detection limit is
// 3.3 (sigma_blank + delta_g) / slope.

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "thinfilm/error.hpp"
#include "thinfilm/film_sim.hpp"
#include "thinfilm/lamp.hpp"
#include "thinfilm/legacy.hpp"

namespace thinfilm::lod {

using film::Spectrum;

enum class Method { rifts, iaw, lamp };
enum class Gradient { none, offset, amplitude };

inline constexpr std::array<Method, 3> all_methods{Method::rifts, Method::iaw, Method::lamp};
inline constexpr std::array<Gradient, 3> all_gradients{Gradient::none, Gradient::offset, Gradient::amplitude};

inline const char* to_string(Method m) {
  switch (m) {
    case Method::rifts: return "rifts";
    case Method::iaw: return "iaw";
    case Method::lamp: return "lamp";
  }
  return "?";
}

inline const char* to_string(Gradient g) {
  switch (g) {
    case Gradient::none: return "none";
    case Gradient::offset: return "offset";
    case Gradient::amplitude: return "amplitude";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  for (Method m : all_methods)
    if (s == to_string(m)) return m;
  fail(ErrorKind::argument, "unknown method '" + s + "' (expected rifts, iaw or lamp)");
}

struct DistributionStats {
  double mean = 0.0;
  double std = 0.0;  // sample std, n - 1 denominator
  std::size_t n_trials = 0;
  std::size_t n_failed = 0;
};

struct LodStudyConfig {
  film::FilmStack stack{};
  std::vector<double> wavelengths = film::default_wavelengths();
  // White-noise level plus the gradient magnitudes used when a gradient is
  // requested; noise.seed is the master seed of the study.
  film::NoiseModel noise = film::NoiseModel::white(27.7, 20240601);
  std::size_t n_trials = 1000;
  double calibration_delta_n = 1e-3;
  // Maximum relative slope difference between delta_n and delta_n / 2. IAW is
  // exempt: its response rectifies noise near delta_n = 0 and is nonlinear by
  // construction, so the check would always reject it.
  double linearity_tolerance = 0.10;
  Method method = Method::lamp;
  legacy::RiftsConfig rifts{};
  legacy::IawConfig iaw{};
  lamp::LampConfig lamp{};
  unsigned threads = 0;  // 0: one per hardware thread

  void validate() const {
    stack.validate();
    noise.validate();
    if (n_trials < 2) fail(ErrorKind::argument, "lod study: n_trials must be >= 2");
    if (!(calibration_delta_n > 0.0)) fail(ErrorKind::argument, "lod study: calibration_delta_n must be positive");
    if (!(linearity_tolerance > 0.0)) fail(ErrorKind::argument, "lod study: linearity_tolerance must be positive");
  }
};

struct GradientTargets {
  double offset_snr_db = 7.9;
  double amplitude_snr_db = 7.7;
};

// Calibrates the offset and amplitude ramp magnitudes so that each ramp,
// together with the white noise, measures the target S/N on the reference.
inline LodStudyConfig calibrate_gradients(LodStudyConfig cfg, const GradientTargets& targets = {}) {
  const auto clean = film::simulate_reflectance(cfg.stack, cfg.wavelengths);
  film::NoiseModel white = cfg.noise;
  white.offset_ramp_magnitude = 0.0;
  white.amplitude_ramp_gain = 0.0;
  cfg.noise.offset_ramp_magnitude = film::calibrate_ramp(clean, white, film::RampKind::offset, targets.offset_snr_db);
  cfg.noise.amplitude_ramp_gain =
      film::calibrate_ramp(clean, white, film::RampKind::amplitude, targets.amplitude_snr_db);
  return cfg;
}

inline LodStudyConfig default_study(Method method) {
  LodStudyConfig cfg;
  cfg.method = method;
  return calibrate_gradients(std::move(cfg));
}

struct LodResult {
  double sigma_blank = 0.0;
  double delta_g = 0.0;
  double slope = 0.0;       // signal units per RIU
  double half_slope = 0.0;  // slope measured at calibration_delta_n / 2
  double lod_riu = 0.0;
  double blank_mean = 0.0;
  double shifted_mean = 0.0;
};

inline double lod_from(double sigma_blank, double delta_g, double slope) {
  return 3.3 * (sigma_blank + delta_g) / slope;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

// One study: a fixed reference and memoized trial distributions. Trial i always
// draws its noise from derive_seed(master, i), so blank, shifted and gradient
// distributions share their white-noise realizations.
class LodStudy {
 public:
  explicit LodStudy(LodStudyConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    reference_ = film::simulate_reflectance(cfg_.stack, cfg_.wavelengths);
    white_sigma_ = cfg_.noise.gaussian_sigma ? *cfg_.noise.gaussian_sigma
                                             : film::white_sigma_for_snr(*reference_, *cfg_.noise.target_snr_db);
    switch (cfg_.method) {
      case Method::rifts: reference_eot_ = legacy::rifts_eot(*reference_, cfg_.rifts); break;
      case Method::lamp: reference_trace_ = lamp::lamp_phase(*reference_, cfg_.lamp); break;
      case Method::iaw: break;
    }
  }

  const LodStudyConfig& config() const { return cfg_; }
  const Spectrum& reference() const { return *reference_; }
  double white_sigma() const { return white_sigma_; }

  film::NoiseModel trial_noise(std::size_t trial, Gradient gradient) const {
    film::NoiseModel m;
    m.gaussian_sigma = white_sigma_;
    m.offset_ramp_magnitude = gradient == Gradient::offset ? cfg_.noise.offset_ramp_magnitude : 0.0;
    m.amplitude_ramp_gain = gradient == Gradient::amplitude ? cfg_.noise.amplitude_ramp_gain : 0.0;
    m.seed = film::derive_seed(cfg_.noise.seed, trial);
    return m;
  }

  double signal(const Spectrum& analyte) const {
    switch (cfg_.method) {
      case Method::rifts: return legacy::rifts_eot(analyte, cfg_.rifts) - reference_eot_;
      case Method::iaw: return legacy::iaw(*reference_, analyte, cfg_.iaw);
      case Method::lamp: {
        const auto trace = lamp::lamp_analyte_phase(*reference_trace_, analyte, cfg_.lamp);
        return lamp::lamp_compare(*reference_trace_, trace, cfg_.lamp).mean_phase_rad;
      }
    }
    return 0.0;
  }

  std::vector<std::optional<double>> trial_signals(double delta_n, Gradient gradient) const {
    const auto clean = film::simulate_reflectance(cfg_.stack.with_index_change(delta_n), cfg_.wavelengths);
    std::vector<std::optional<double>> out(cfg_.n_trials);
    parallel_for(cfg_.n_trials, cfg_.threads, [&](std::size_t i) {
      try {
        out[i] = signal(film::add_noise(clean, trial_noise(i, gradient)));
      } catch (const Error&) {
        out[i].reset();
      }
    });
    return out;
  }

  const DistributionStats& distribution(double delta_n, Gradient gradient) {
    const auto key = std::make_pair(delta_n, static_cast<int>(gradient));
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const auto values = trial_signals(delta_n, gradient);
    DistributionStats stats;
    double sum = 0.0;
    for (const auto& v : values) {
      if (v) {
        sum += *v;
        ++stats.n_trials;
      } else {
        ++stats.n_failed;
      }
    }
    if (stats.n_failed * 100 > values.size() || stats.n_trials < 2)
      fail(ErrorKind::study, std::string("lod study (") + to_string(cfg_.method) + ", " + to_string(gradient) +
                                 ", delta_n=" + std::to_string(delta_n) + "): method failed in " +
                                 std::to_string(stats.n_failed) + " of " + std::to_string(values.size()) +
                                 " trials");
    stats.mean = sum / static_cast<double>(stats.n_trials);
    double ss = 0.0;
    for (const auto& v : values)
      if (v) ss += (*v - stats.mean) * (*v - stats.mean);
    stats.std = std::sqrt(ss / static_cast<double>(stats.n_trials - 1));
    return cache_.emplace(key, stats).first->second;
  }

  double gradient_delta(Gradient gradient) {
    if (gradient == Gradient::none) return 0.0;
    const double with = distribution(0.0, gradient).mean;
    const double without = distribution(0.0, Gradient::none).mean;
    return std::abs(with - without);
  }

  LodResult lod(Gradient gradient) {
    const double dn = cfg_.calibration_delta_n;
    const auto& blank = distribution(0.0, Gradient::none);
    const auto& shifted = distribution(dn, Gradient::none);
    const double slope = (shifted.mean - blank.mean) / dn;
    if (!(slope > 0.0))
      fail(ErrorKind::calibration, std::string("lod study (") + to_string(cfg_.method) +
                                       "): signal does not increase with refractive index");
    const auto& half = distribution(0.5 * dn, Gradient::none);
    const double half_slope = (half.mean - blank.mean) / (0.5 * dn);
    if (cfg_.method != Method::iaw && std::abs(half_slope - slope) > cfg_.linearity_tolerance * slope)
      fail(ErrorKind::calibration, std::string("lod study (") + to_string(cfg_.method) +
                                       "): response is not linear between delta_n/2 and delta_n (slopes " +
                                       std::to_string(half_slope) + " vs " + std::to_string(slope) + ")");
    LodResult r;
    r.sigma_blank = blank.std;
    r.delta_g = gradient_delta(gradient);
    r.slope = slope;
    r.half_slope = half_slope;
    r.lod_riu = lod_from(r.sigma_blank, r.delta_g, slope);
    r.blank_mean = blank.mean;
    r.shifted_mean = shifted.mean;
    return r;
  }

 private:
  LodStudyConfig cfg_;
  std::optional<Spectrum> reference_;
  double white_sigma_ = 0.0;
  double reference_eot_ = 0.0;
  std::optional<lamp::PhaseTrace> reference_trace_;
  std::map<std::pair<double, int>, DistributionStats> cache_;
};

inline DistributionStats response_distribution(const LodStudyConfig& cfg, double delta_n, Gradient gradient) {
  LodStudy study(cfg);
  return study.distribution(delta_n, gradient);
}

inline double gradient_delta(const LodStudyConfig& cfg, Gradient gradient) {
  LodStudy study(cfg);
  return study.gradient_delta(gradient);
}

inline LodResult lod_riu(const LodStudyConfig& cfg, Gradient gradient) {
  LodStudy study(cfg);
  return study.lod(gradient);
}

struct LodTableCell {
  Method method = Method::lamp;
  Gradient gradient = Gradient::none;
  std::optional<LodResult> result;
  std::string error;
};

// Rows rifts / iaw / lamp, columns none / offset / amplitude.
struct LodTable {
  std::array<std::array<LodTableCell, 3>, 3> cells{};
  double white_sigma = 0.0;
  double offset_ramp_magnitude = 0.0;
  double amplitude_ramp_gain = 0.0;

  const LodTableCell& at(Method m, Gradient g) const {
    return cells[static_cast<std::size_t>(m)][static_cast<std::size_t>(g)];
  }
};

inline LodTable run_lod_table(const LodStudyConfig& base) {
  LodTable table;
  table.offset_ramp_magnitude = base.noise.offset_ramp_magnitude;
  table.amplitude_ramp_gain = base.noise.amplitude_ramp_gain;
  for (Method m : all_methods) {
    LodStudyConfig cfg = base;
    cfg.method = m;
    std::optional<LodStudy> study;
    std::string setup_error;
    try {
      study.emplace(cfg);
      table.white_sigma = study->white_sigma();
    } catch (const Error& e) {
      setup_error = e.what();
    }
    for (Gradient g : all_gradients) {
      auto& cell = table.cells[static_cast<std::size_t>(m)][static_cast<std::size_t>(g)];
      cell.method = m;
      cell.gradient = g;
      if (!study) {
        cell.error = setup_error;
        continue;
      }
      try {
        cell.result = study->lod(g);
      } catch (const Error& e) {
        cell.error = e.what();
      }
    }
  }
  return table;
}

}  // namespace thinfilm::lod
