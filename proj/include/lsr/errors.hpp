#pragma once

#include <stdexcept>
#include <string>

namespace lsr {

enum class ErrorCode {
  NonSingularJacobian = 1,
  NonFinite,
  DimensionMismatch,
  UnknownModel,
  ParseError,
  ArityError,
  UnknownIdentifier,
  DomainError,
  SingularDyf,
  SingularReducedJacobian,
  NotEquilibrium,
  NewtonDiverged,
  SingularNewtonSystem,
  UnsupportedDimensions,
  InvalidArgument,
  ConfigError,
  IoError,
};

/// Stable identifier used in reports and by the C API ("NonSingularJacobian", ...).
const char* error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace lsr
