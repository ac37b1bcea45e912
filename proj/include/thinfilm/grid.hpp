// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 thinfilm contributors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thinfilm/error.hpp"
#include "thinfilm/film_sim.hpp"

namespace thinfilm::grid {

using film::Spectrum;

struct WavelengthRange {
  double lo_nm = 500.0;
  double hi_nm = 800.0;

  void validate() const {
    if (!(lo_nm > 0.0) || !(hi_nm > lo_nm))
      fail(ErrorKind::argument, "wavelength range must satisfy 0 < lo < hi");
  }
};

// Uniform wavenumber axis sigma_k = sigma_min + k * spacing, in nm^-1.
class WavenumberGrid {
 public:
  WavenumberGrid(double sigma_min, double sigma_max, std::size_t n_points)
      : sigma_min_(sigma_min), sigma_max_(sigma_max), n_points_(n_points) {
    if (!(sigma_min > 0.0) || !(sigma_max > sigma_min))
      fail(ErrorKind::argument, "wavenumber grid requires 0 < sigma_min < sigma_max");
    if (n_points < 16) fail(ErrorKind::argument, "wavenumber grid requires at least 16 points");
  }

  static WavenumberGrid from_range(const WavelengthRange& range, std::size_t n_points) {
    range.validate();
    return WavenumberGrid(1.0 / range.hi_nm, 1.0 / range.lo_nm, n_points);
  }

  double sigma_min() const { return sigma_min_; }
  double sigma_max() const { return sigma_max_; }
  std::size_t size() const { return n_points_; }
  double spacing() const { return (sigma_max_ - sigma_min_) / static_cast<double>(n_points_ - 1); }
  double at(std::size_t k) const {
    return k + 1 == n_points_ ? sigma_max_ : sigma_min_ + spacing() * static_cast<double>(k);
  }
  double mean_sigma() const { return 0.5 * (sigma_min_ + sigma_max_); }

  friend bool operator==(const WavenumberGrid&, const WavenumberGrid&) = default;

 private:
  double sigma_min_;
  double sigma_max_;
  std::size_t n_points_;
};

struct ResampledSpectrum {
  WavenumberGrid grid;
  std::vector<double> values;
};

enum class Interpolation { linear, cubic_spline };
enum class SplineBoundary { not_a_knot, natural };

// Interpolating cubic spline through strictly ascending abscissae.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> x, std::vector<double> y, SplineBoundary boundary)
      : x_(std::move(x)), y_(std::move(y)), m_(x_.size(), 0.0) {
    const std::size_t n = x_.size();
    if (n < 4 || y_.size() != n) fail(ErrorKind::argument, "spline: need at least 4 matching samples");
    std::vector<double> h(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) h[i] = x_[i + 1] - x_[i];

    // Second derivatives M_1..M_{n-2}; the end values follow from the boundary rule.
    const std::size_t k = n - 2;
    std::vector<double> sub(k, 0.0), diag(k, 0.0), sup(k, 0.0), rhs(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t i = j + 1;
      sub[j] = h[i - 1];
      diag[j] = 2.0 * (h[i - 1] + h[i]);
      sup[j] = h[i];
      rhs[j] = 6.0 * ((y_[i + 1] - y_[i]) / h[i] - (y_[i] - y_[i - 1]) / h[i - 1]);
    }
    if (boundary == SplineBoundary::not_a_knot) {
      // Continuous third derivative at x_1 and x_{n-2}; M_0 and M_{n-1} are
      // eliminated into the first and last rows.
      const double h0 = h[0], h1 = h[1];
      diag[0] = (h0 + h1) * (2.0 * h1 + h0) / h1;
      sup[0] = (h1 * h1 - h0 * h0) / h1;
      const double ha = h[n - 3], hb = h[n - 2];
      sub[k - 1] = (ha * ha - hb * hb) / ha;
      diag[k - 1] = (ha + hb) * (2.0 * ha + hb) / ha;
    }
    // Thomas algorithm.
    for (std::size_t j = 1; j < k; ++j) {
      const double w = sub[j] / diag[j - 1];
      diag[j] -= w * sup[j - 1];
      rhs[j] -= w * rhs[j - 1];
    }
    std::vector<double> mid(k);
    mid[k - 1] = rhs[k - 1] / diag[k - 1];
    for (std::size_t j = k - 1; j-- > 0;) mid[j] = (rhs[j] - sup[j] * mid[j + 1]) / diag[j];
    for (std::size_t j = 0; j < k; ++j) m_[j + 1] = mid[j];
    if (boundary == SplineBoundary::not_a_knot) {
      const double h0 = h[0], h1 = h[1];
      m_[0] = ((h0 + h1) * m_[1] - h0 * m_[2]) / h1;
      const double ha = h[n - 3], hb = h[n - 2];
      m_[n - 1] = ((ha + hb) * m_[n - 2] - hb * m_[n - 3]) / ha;
    }
  }

  double operator()(double xq) const {
    const std::size_t n = x_.size();
    auto it = std::upper_bound(x_.begin(), x_.end(), xq);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    i = std::min(i, n - 2);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - xq) / h;
    const double b = (xq - x_[i]) / h;
    return a * y_[i] + b * y_[i + 1] +
           ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * (h * h) / 6.0;
  }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;
};

inline double linear_interpolate(std::span<const double> x, std::span<const double> y, double xq) {
  auto it = std::upper_bound(x.begin(), x.end(), xq);
  std::size_t i = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  i = std::min(i, x.size() - 2);
  const double t = (xq - x[i]) / (x[i + 1] - x[i]);
  return y[i] + t * (y[i + 1] - y[i]);
}

// Resamples onto a uniform wavenumber grid spanning [1/hi, 1/lo]. Interpolation
// runs in the wavenumber domain (abscissae 1/lambda), so data linear in 1/lambda
// is reproduced exactly by the linear method.
inline ResampledSpectrum to_wavenumber(const Spectrum& spectrum, const WavelengthRange& range,
                                       std::size_t n_points, Interpolation method,
                                       SplineBoundary boundary = SplineBoundary::not_a_knot) {
  range.validate();
  if (n_points < 16) fail(ErrorKind::argument, "to_wavenumber: n_points must be >= 16");
  const double tol = 1e-9 * range.hi_nm;
  if (range.lo_nm < spectrum.min_wavelength() - tol || range.hi_nm > spectrum.max_wavelength() + tol)
    fail(ErrorKind::range, "to_wavenumber: requested range [" + std::to_string(range.lo_nm) + ", " +
                               std::to_string(range.hi_nm) + "] nm lies outside the data [" +
                               std::to_string(spectrum.min_wavelength()) + ", " +
                               std::to_string(spectrum.max_wavelength()) + "] nm");

  const auto& wl = spectrum.wavelengths_nm();
  const auto& r = spectrum.reflectance();
  const std::size_t n = wl.size();
  std::vector<double> sx(n), sy(n);
  for (std::size_t i = 0; i < n; ++i) {
    sx[i] = 1.0 / wl[n - 1 - i];
    sy[i] = r[n - 1 - i];
  }

  WavenumberGrid grid = WavenumberGrid::from_range(range, n_points);
  std::vector<double> values(n_points);
  const double lo = sx.front(), hi = sx.back();
  if (method == Interpolation::linear) {
    for (std::size_t k = 0; k < n_points; ++k)
      values[k] = linear_interpolate(sx, sy, std::clamp(grid.at(k), lo, hi));
  } else {
    const CubicSpline spline(std::move(sx), std::move(sy), boundary);
    for (std::size_t k = 0; k < n_points; ++k) values[k] = spline(std::clamp(grid.at(k), lo, hi));
  }
  return ResampledSpectrum{grid, std::move(values)};
}

enum class Baseline { mean, linear, quadratic };

inline int baseline_degree(Baseline kind) {
  switch (kind) {
    case Baseline::mean: return 0;
    case Baseline::linear: return 1;
    case Baseline::quadratic: return 2;
  }
  return 0;
}

// Subtracts the least-squares polynomial (degree 0, 1 or 2) in sample index.
inline std::vector<double> remove_baseline(std::span<const double> values, Baseline kind) {
  const std::size_t n = values.size();
  const int degree = baseline_degree(kind);
  if (n < static_cast<std::size_t>(degree) + 2) fail(ErrorKind::argument, "remove_baseline: too few samples");
  Eigen::MatrixXd basis(static_cast<Eigen::Index>(n), degree + 1);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  const double half = 0.5 * static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (static_cast<double>(i) - half) / half;
    double p = 1.0;
    for (int d = 0; d <= degree; ++d, p *= x) basis(static_cast<Eigen::Index>(i), d) = p;
    y(static_cast<Eigen::Index>(i)) = values[i];
  }
  const Eigen::VectorXd residual = y - basis * basis.householderQr().solve(y);
  return {residual.data(), residual.data() + residual.size()};
}

inline std::vector<double> hann_window(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) fail(ErrorKind::argument, "hann_window: need at least 2 samples");
  std::vector<double> out(n);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = values[i] * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / denom));
  return out;
}

inline std::vector<double> zero_pad(std::span<const double> values, std::size_t target_len) {
  if (target_len < values.size()) fail(ErrorKind::argument, "zero_pad: target shorter than input");
  std::vector<double> out(target_len, 0.0);
  std::copy(values.begin(), values.end(), out.begin());
  return out;
}

// Smallest power of two >= n whose DFT bin spacing 1/(N * spacing) is at most
// max_bin_nm on the optical-thickness axis.
inline std::size_t default_pad_length(std::size_t n, double delta_sigma, double max_bin_nm = 1.5) {
  if (!(delta_sigma > 0.0) || !(max_bin_nm > 0.0)) fail(ErrorKind::argument, "default_pad_length: bad arguments");
  std::size_t len = 1;
  while (len < n || 1.0 / (static_cast<double>(len) * delta_sigma) > max_bin_nm) len <<= 1;
  return len;
}

// pad_exponent 0 selects default_pad_length.
inline std::size_t pad_length_for(std::size_t n, double delta_sigma, unsigned pad_exponent) {
  if (pad_exponent == 0) return default_pad_length(n, delta_sigma);
  const std::size_t len = std::size_t{1} << pad_exponent;
  if (len < n) fail(ErrorKind::argument, "pad_exponent gives a length shorter than the data");
  return len;
}

}  // namespace thinfilm::grid
