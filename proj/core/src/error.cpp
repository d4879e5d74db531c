#include "fertcast/error.hpp"

namespace fertcast {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::MissingCell: return "MissingCell";
    case ErrorCode::DuplicateCell: return "DuplicateCell";
    case ErrorCode::NonNumericValue: return "NonNumericValue";
    case ErrorCode::NegativeRate: return "NegativeRate";
    case ErrorCode::LogOfZero: return "LogOfZero";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::TooFewYears: return "TooFewYears";
    case ErrorCode::BadLambda: return "BadLambda";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::NonInvertible: return "NonInvertible";
    case ErrorCode::NoModelFit: return "NoModelFit";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::BadInterval: return "BadInterval";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::IncompatibleForecasts: return "IncompatibleForecasts";
    case ErrorCode::TooFewPeriods: return "TooFewPeriods";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::UnknownCountry: return "UnknownCountry";
    case ErrorCode::UnknownMethod: return "UnknownMethod";
  }
  return "Unknown";
}

}  // namespace fertcast
