#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace backflow {

enum class ErrorCode {
  NotHermitian,
  NotPositive,
  BadTrace,
  DimensionMismatch,
  IdenticalStates,
  BadDimension,
  OrthogonalPair,
  DomainError,
  PositivityFailure,
  QuadratureFailure,
  CptViolation,
  IntegratorDiverged,
  PositivityLost,
  IndexOutOfRange,
  ParseError,
  ValidationError,
};

std::string_view to_string(ErrorCode code);

/// True for failures of the numerics (as opposed to bad input). The CLI maps
/// these to exit code 2.
bool is_numerical_failure(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace backflow
