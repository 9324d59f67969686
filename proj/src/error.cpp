#include "fracrd/error.hpp"

namespace fracrd {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidDims: return "InvalidDims";
    case ErrorCode::NotPowerOfTwo: return "NotPowerOfTwo";
    case ErrorCode::MemoryBudgetExceeded: return "MemoryBudgetExceeded";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::GridTooLarge: return "GridTooLarge";
    case ErrorCode::BetaOutOfRange: return "BetaOutOfRange";
    case ErrorCode::NonPositiveTime: return "NonPositiveTime";
    case ErrorCode::NegativeTime: return "NegativeTime";
    case ErrorCode::TailMassTooLarge: return "TailMassTooLarge";
    case ErrorCode::ExponentOrder: return "ExponentOrder";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::NegativeStateBeyondTolerance: return "NegativeStateBeyondTolerance";
    case ErrorCode::NonFiniteRate: return "NonFiniteRate";
    case ErrorCode::MissingMeta: return "MissingMeta";
    case ErrorCode::DissipationViolated: return "DissipationViolated";
    case ErrorCode::NegativeInitialData: return "NegativeInitialData";
    case ErrorCode::PicardDivergence: return "PicardDivergence";
    case ErrorCode::EmptyTrajectory: return "EmptyTrajectory";
    case ErrorCode::GammaOutOfRange: return "GammaOutOfRange";
    case ErrorCode::TooFewSlices: return "TooFewSlices";
    case ErrorCode::EllOutOfRange: return "EllOutOfRange";
    case ErrorCode::QOutOfRange: return "QOutOfRange";
    case ErrorCode::ZeroField: return "ZeroField";
    case ErrorCode::NonUniformTimeGrid: return "NonUniformTimeGrid";
    case ErrorCode::RhoInadmissible: return "RhoInadmissible";
    case ErrorCode::P0TooSmall: return "P0TooSmall";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::ModelUnknown: return "ModelUnknown";
    case ErrorCode::OutputUnwritable: return "OutputUnwritable";
    case ErrorCode::UnknownAxis: return "UnknownAxis";
    case ErrorCode::EmptyValues: return "EmptyValues";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace fracrd
