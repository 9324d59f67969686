#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fracrd {

enum class ErrorCode {
  InvalidArgument,
  InvalidDims,
  NotPowerOfTwo,
  MemoryBudgetExceeded,
  GridMismatch,
  NonFiniteInput,
  GridTooLarge,
  BetaOutOfRange,
  NonPositiveTime,
  NegativeTime,
  TailMassTooLarge,
  ExponentOrder,
  DegenerateFit,
  InvalidModel,
  NegativeStateBeyondTolerance,
  NonFiniteRate,
  MissingMeta,
  DissipationViolated,
  NegativeInitialData,
  PicardDivergence,
  EmptyTrajectory,
  GammaOutOfRange,
  TooFewSlices,
  EllOutOfRange,
  QOutOfRange,
  ZeroField,
  NonUniformTimeGrid,
  RhoInadmissible,
  P0TooSmall,
  ConfigInvalid,
  ModelUnknown,
  OutputUnwritable,
  UnknownAxis,
  EmptyValues,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fracrd
