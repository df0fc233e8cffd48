#include "backflow/errors.hpp"

namespace backflow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::BadTrace: return "BadTrace";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IdenticalStates: return "IdenticalStates";
    case ErrorCode::BadDimension: return "BadDimension";
    case ErrorCode::OrthogonalPair: return "OrthogonalPair";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::PositivityFailure: return "PositivityFailure";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::CptViolation: return "CptViolation";
    case ErrorCode::IntegratorDiverged: return "IntegratorDiverged";
    case ErrorCode::PositivityLost: return "PositivityLost";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "UnknownError";
}

bool is_numerical_failure(ErrorCode code) {
  switch (code) {
    case ErrorCode::PositivityFailure:
    case ErrorCode::QuadratureFailure:
    case ErrorCode::CptViolation:
    case ErrorCode::IntegratorDiverged:
    case ErrorCode::PositivityLost:
      return true;
    default:
      return false;
  }
}

}  // namespace backflow
