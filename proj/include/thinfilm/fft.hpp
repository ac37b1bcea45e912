// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 thinfilm contributors

// Thin RAII layer over FFTW. Plans are created once per (kind, length) under a
// mutex and executed through the new-array interface, which is thread-safe.

#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "thinfilm/error.hpp"

namespace thinfilm::fft {

namespace detail {

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

inline FftwBuffer<double> alloc_real(std::size_t n) {
  auto* p = fftw_alloc_real(n);
  if (!p) fail(ErrorKind::argument, "fft: allocation failed");
  return FftwBuffer<double>(p);
}

inline FftwBuffer<fftw_complex> alloc_complex(std::size_t n) {
  auto* p = fftw_alloc_complex(n);
  if (!p) fail(ErrorKind::argument, "fft: allocation failed");
  return FftwBuffer<fftw_complex>(p);
}

enum class PlanKind { r2c, forward, backward };

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(PlanKind kind, std::size_t n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find({kind, n});
    if (it != plans_.end()) return it->second;
    // Planning with ESTIMATE does not touch the arrays; scratch buffers only
    // fix the alignment class the plan expects.
    fftw_plan plan = nullptr;
    const int len = static_cast<int>(n);
    if (kind == PlanKind::r2c) {
      auto in = alloc_real(n);
      auto out = alloc_complex(n / 2 + 1);
      plan = fftw_plan_dft_r2c_1d(len, in.get(), out.get(), FFTW_ESTIMATE);
    } else {
      auto in = alloc_complex(n);
      auto out = alloc_complex(n);
      plan = fftw_plan_dft_1d(len, in.get(), out.get(),
                              kind == PlanKind::forward ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    if (!plan) fail(ErrorKind::argument, "fft: FFTW could not create a plan");
    plans_.emplace(std::make_pair(kind, n), plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::pair<PlanKind, std::size_t>, fftw_plan> plans_;
};

}  // namespace detail

// Unnormalized forward transform of `values` zero-extended to `length`;
// returns the non-negative-frequency half (length / 2 + 1 bins).
inline std::vector<std::complex<double>> real_forward(std::span<const double> values, std::size_t length) {
  if (length < values.size() || length == 0) fail(ErrorKind::argument, "fft: length shorter than input");
  auto plan = detail::PlanCache::instance().get(detail::PlanKind::r2c, length);
  auto in = detail::alloc_real(length);
  auto out = detail::alloc_complex(length / 2 + 1);
  std::memcpy(in.get(), values.data(), values.size() * sizeof(double));
  std::memset(in.get() + values.size(), 0, (length - values.size()) * sizeof(double));
  fftw_execute_dft_r2c(plan, in.get(), out.get());
  std::vector<std::complex<double>> result(length / 2 + 1);
  std::memcpy(static_cast<void*>(result.data()), out.get(), result.size() * sizeof(fftw_complex));
  return result;
}

// Unnormalized complex transform, in place. sign = -1 forward, +1 backward.
inline void complex_transform(std::vector<std::complex<double>>& data, int sign) {
  const std::size_t n = data.size();
  if (n == 0) return;
  auto plan = detail::PlanCache::instance().get(
      sign < 0 ? detail::PlanKind::forward : detail::PlanKind::backward, n);
  auto in = detail::alloc_complex(n);
  auto out = detail::alloc_complex(n);
  std::memcpy(in.get(), static_cast<const void*>(data.data()), n * sizeof(fftw_complex));
  fftw_execute_dft(plan, in.get(), out.get());
  std::memcpy(static_cast<void*>(data.data()), out.get(), n * sizeof(fftw_complex));
}

inline std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace thinfilm::fft
