#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace silencer {

enum class ErrorCode {
  NonSquare,
  NonFinite,
  Negative,
  TooSmall,
  AllZero,
  NegativeEntry,
  ZeroVariance,
  LengthMismatch,
  TooShort,
  ZeroReferenceSum,
  EmptyReferences,
  OutOfRange,
  DimensionMismatch,
  NegativeRawWeight,
  MaxIterationsExceeded,
  PoolTooSmall,
  InvalidN,
  TraceTooShort,
  EmptyEnsemble,
  ZeroDraws,
  TooLargeForExact,
  InvalidSpec,
  InvalidConfig,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The code is
/// stable and is what the CLI maps onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace silencer
