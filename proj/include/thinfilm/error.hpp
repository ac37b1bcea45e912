// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 thinfilm contributors

#pragma once

#include <stdexcept>
#include <string>

namespace thinfilm {

enum class ErrorKind {
  domain,
  argument,
  range,
  alignment,
  no_fringe_peak,
  degenerate_amplitude,
  calibration,
  fit,
  parse,
  io,
  study,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain error";
    case ErrorKind::argument: return "argument error";
    case ErrorKind::range: return "range error";
    case ErrorKind::alignment: return "alignment error";
    case ErrorKind::no_fringe_peak: return "no fringe peak";
    case ErrorKind::degenerate_amplitude: return "degenerate amplitude";
    case ErrorKind::calibration: return "calibration error";
    case ErrorKind::fit: return "fit error";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::io: return "i/o error";
    case ErrorKind::study: return "study aborted";
  }
  return "error";
}

// Every failure raised by the library carries a kind so callers (and the CLI
// exit-code mapping) can tell a malformed file from a missing fringe peak.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace thinfilm
