// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 thinfilm contributors

#pragma once

#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include "thinfilm/error.hpp"
#include "thinfilm/film_sim.hpp"

namespace testing_support {

namespace fs = std::filesystem;

// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    path_ = fs::temp_directory_path() /
            ("thinfilm-test-" + std::to_string(std::random_device{}()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline thinfilm::film::Spectrum default_spectrum(double delta_n = 0.0) {
  return thinfilm::film::simulate_reflectance(thinfilm::film::FilmStack{}.with_index_change(delta_n),
                                              thinfilm::film::default_wavelengths());
}

// Mean wavenumber of the default 500-800 nm range.
inline constexpr double mean_sigma = 0.5 * (1.0 / 800.0 + 1.0 / 500.0);

}  // namespace testing_support

// Asserts that `stmt` throws thinfilm::Error of the given kind.
#define EXPECT_THINFILM_ERROR(stmt, expected_kind)                                  \
  do {                                                                              \
    try {                                                                           \
      stmt;                                                                         \
      ADD_FAILURE() << "no exception from " #stmt;                                  \
    } catch (const thinfilm::Error& e) {                                            \
      EXPECT_EQ(e.kind(), thinfilm::ErrorKind::expected_kind) << e.what();          \
    }                                                                               \
  } while (false)
