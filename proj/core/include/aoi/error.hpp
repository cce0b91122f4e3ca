#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aoi {

enum class ErrorCode {
  RejectsEmptyOrNegative,
  RejectsZeroFirstSlot,
  RejectsUnnormalized,
  OutOfSupport,
  RejectsKSmallerThanL,
  InfeasibleAction,
  StateOutsideGrid,
  InvalidGrid,
  NoConvergence,
  InvalidThresholds,
  NonErgodicChain,
  HorizonTooShort,
  InvalidPolicy,
  InvalidInput,
};

std::string_view to_string(ErrorCode code);

// Domain error carrying a machine-readable code plus free-form context
// (e.g. the offending index or the last residual).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string context = {})
      : std::runtime_error(std::move(message)), code_(code), context_(std::move(context)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& context() const noexcept { return context_; }

 private:
  ErrorCode code_;
  std::string context_;
};

}  // namespace aoi
