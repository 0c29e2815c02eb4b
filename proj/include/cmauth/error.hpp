// Copyright (C) 2026 The cmauth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cmauth {

enum class ErrorCode {
  kOversize,
  kKTooLarge,
  kNotPowerOfTwo,
  kIndexOutOfRange,
  kStaleIndex,
  kCacheMiss,
  kScheduleViolation,
  kConfigInvalid,
  kMalformed,
  kIo,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOversize: return "OVERSIZE";
    case ErrorCode::kKTooLarge: return "K_TOO_LARGE";
    case ErrorCode::kNotPowerOfTwo: return "NOT_POWER_OF_TWO";
    case ErrorCode::kIndexOutOfRange: return "INDEX_OUT_OF_RANGE";
    case ErrorCode::kStaleIndex: return "STALE_INDEX";
    case ErrorCode::kCacheMiss: return "CACHE_MISS";
    case ErrorCode::kScheduleViolation: return "SCHEDULE_VIOLATION";
    case ErrorCode::kConfigInvalid: return "CONFIG_INVALID";
    case ErrorCode::kMalformed: return "MALFORMED";
    case ErrorCode::kIo: return "IO";
  }
  return "UNKNOWN";
}

/// Exception carrying a machine-checkable error code; the message is prefixed
/// with the code name.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cmauth
