#include "aoi/error.hpp"

namespace aoi {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::RejectsEmptyOrNegative: return "RejectsEmptyOrNegative";
    case ErrorCode::RejectsZeroFirstSlot: return "RejectsZeroFirstSlot";
    case ErrorCode::RejectsUnnormalized: return "RejectsUnnormalized";
    case ErrorCode::OutOfSupport: return "OutOfSupport";
    case ErrorCode::RejectsKSmallerThanL: return "RejectsKSmallerThanL";
    case ErrorCode::InfeasibleAction: return "InfeasibleAction";
    case ErrorCode::StateOutsideGrid: return "StateOutsideGrid";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::InvalidThresholds: return "InvalidThresholds";
    case ErrorCode::NonErgodicChain: return "NonErgodicChain";
    case ErrorCode::HorizonTooShort: return "HorizonTooShort";
    case ErrorCode::InvalidPolicy: return "InvalidPolicy";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

}  // namespace aoi
