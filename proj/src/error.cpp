#include "silencer/error.hpp"

namespace silencer {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::Negative: return "Negative";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::ZeroReferenceSum: return "ZeroReferenceSum";
    case ErrorCode::EmptyReferences: return "EmptyReferences";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NegativeRawWeight: return "NegativeRawWeight";
    case ErrorCode::MaxIterationsExceeded: return "MaxIterationsExceeded";
    case ErrorCode::PoolTooSmall: return "PoolTooSmall";
    case ErrorCode::InvalidN: return "InvalidN";
    case ErrorCode::TraceTooShort: return "TraceTooShort";
    case ErrorCode::EmptyEnsemble: return "EmptyEnsemble";
    case ErrorCode::ZeroDraws: return "ZeroDraws";
    case ErrorCode::TooLargeForExact: return "TooLargeForExact";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace silencer
