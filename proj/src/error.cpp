#include "bistable/error.hpp"

namespace bistable {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::BadSupport: return "BadSupport";
    case ErrorCode::ZeroNominal: return "ZeroNominal";
    case ErrorCode::OutOfSupport: return "OutOfSupport";
    case ErrorCode::Underdetermined: return "Underdetermined";
    case ErrorCode::DegenerateSpread: return "DegenerateSpread";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::EmptyEvent: return "EmptyEvent";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFinite:
    case ErrorCode::Underdetermined:
    case ErrorCode::DegenerateSpread:
    case ErrorCode::TooShort:
    case ErrorCode::EmptyWindow:
    case ErrorCode::TooFewSamples:
    case ErrorCode::EmptyEvent:
      return true;
    default:
      return false;
  }
}

}  // namespace bistable
