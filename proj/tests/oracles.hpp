// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 thinfilm contributors

// Independent reference computations used to check the library: direct
// summation instead of FFTs, brute-force extremum search, closed forms.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

namespace oracle {

using cd = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

// X[m] = sum_n x[n] exp(-2 pi i m n / N), evaluated by direct summation in
// long double.
inline std::vector<cd> direct_dft(std::span<const double> x, std::size_t bins) {
  const std::size_t n = x.size();
  std::vector<cd> out(bins);
  for (std::size_t m = 0; m < bins; ++m) {
    long double re = 0.0L, im = 0.0L;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t r = (m * k) % n;
      const long double angle = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>(r) /
                                static_cast<long double>(n);
      re += x[k] * std::cos(angle);
      im += x[k] * std::sin(angle);
    }
    out[m] = {static_cast<double>(re), static_cast<double>(im)};
  }
  return out;
}

// Zero-padded DFT evaluated at arbitrary bins m of an N_pad-point transform.
inline cd padded_bin(std::span<const double> x, std::size_t padded, std::size_t m) {
  long double re = 0.0L, im = 0.0L;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const std::size_t r = (m * k) % padded;
    const long double angle =
        -2.0L * std::numbers::pi_v<long double> * static_cast<long double>(r) / static_cast<long double>(padded);
    re += x[k] * std::cos(angle);
    im += x[k] * std::sin(angle);
  }
  return {static_cast<double>(re), static_cast<double>(im)};
}

// "Same"-aligned linear convolution with zero extension: out[i] = sum_j
// x[j] h[i - j + half], half = (taps - 1) / 2.
inline std::vector<cd> direct_same_convolution(std::span<const double> x, std::span<const cd> h) {
  const std::size_t n = x.size();
  const auto half = static_cast<long>(h.size() / 2);
  std::vector<cd> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    cd acc{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
      const long k = static_cast<long>(i) - static_cast<long>(j) + half;
      if (k >= 0 && k < static_cast<long>(h.size())) acc += x[j] * h[static_cast<std::size_t>(k)];
    }
    out[i] = acc;
  }
  return out;
}

// Frequency response of a sampled complex sequence at frequency f (nm on the
// optical-thickness axis), samples centered on index half.
inline cd frequency_response(std::span<const cd> w, double spacing, double f) {
  const auto half = static_cast<double>(w.size() / 2);
  cd acc{0.0, 0.0};
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double s = (static_cast<double>(k) - half) * spacing;
    acc += w[k] * std::polar(1.0, -2.0 * pi * f * s);
  }
  return acc;
}

// Normal-incidence single-layer reflectance from the Airy summation of the two
// interface amplitude coefficients (real indices).
inline double airy_reflectance(double n0, double n1, double n2, double thickness_nm, double wavelength_nm) {
  const double r01 = (n0 - n1) / (n0 + n1);
  const double r12 = (n1 - n2) / (n1 + n2);
  const cd e = std::polar(1.0, -4.0 * pi * n1 * thickness_nm / wavelength_nm);
  const cd r = (r01 + r12 * e) / (1.0 + r01 * r12 * e);
  return std::norm(r);
}

// Wavelengths of interior local maxima of f on a fine grid, refined by a
// parabola through the three samples around each maximum.
template <class F>
std::vector<double> local_maxima(F f, double lo, double hi, double step) {
  std::vector<double> out;
  double a = f(lo), b = f(lo + step);
  for (double x = lo + step; x + step <= hi; x += step) {
    const double c = f(x + step);
    if (b > a && b >= c) {
      const double denom = a - 2.0 * b + c;
      out.push_back(denom < 0.0 ? x + 0.5 * step * (a - c) / denom : x);
    }
    a = b;
    b = c;
  }
  return out;
}

// Peak location and FWHM of a kernel's magnitude response, from a uniform
// scan of the direct frequency response over [lo, hi].
inline std::pair<double, double> response_centre_and_fwhm(std::span<const cd> w, double spacing, double lo, double hi,
                                                          double step = 0.25) {
  std::vector<double> f, mag;
  for (double x = lo; x <= hi; x += step) {
    f.push_back(x);
    mag.push_back(std::abs(frequency_response(w, spacing, x)));
  }
  const auto best = static_cast<std::size_t>(std::max_element(mag.begin(), mag.end()) - mag.begin());
  const double half = 0.5 * mag[best];
  std::size_t a = best, b = best;
  while (a > 0 && mag[a] > half) --a;
  while (b + 1 < mag.size() && mag[b] > half) ++b;
  auto cross = [&](std::size_t in, std::size_t out) {
    return f[in] + (half - mag[in]) * (f[out] - f[in]) / (mag[out] - mag[in]);
  };
  return {f[best], cross(b - 1, b) - cross(a + 1, a)};
}

}  // namespace oracle
