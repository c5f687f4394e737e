#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ccqed {

enum class ErrorCode {
  BasisMismatch,
  InvalidParams,
  InvalidPulse,
  TruncationTooCoarse,
  SingularK,
  NotHermitian,
  ConvergenceFailure,
  DimTooLarge,
  WindowTooLong,
  IllConditioned,
  Validation,
  Io,
  InvariantViolation,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a named error code. Validation and Io map to CLI exit
/// code 1, everything else is a numerical failure (exit code 2).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ccqed
