#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fertcast {

enum class ErrorCode {
  InvalidArgument,
  Io,
  EmptyFile,
  MissingCell,
  DuplicateCell,
  NonNumericValue,
  NegativeRate,
  LogOfZero,
  SingularSystem,
  TooFewYears,
  BadLambda,
  TooShort,
  NonConvergence,
  NonInvertible,
  NoModelFit,
  EmptyGroup,
  BadInterval,
  LengthMismatch,
  IncompatibleForecasts,
  TooFewPeriods,
  InsufficientHistory,
  UnknownCountry,
  UnknownMethod,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-checkable error code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fertcast
