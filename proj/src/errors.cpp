#include "lsr/errors.hpp"

namespace lsr {

const char* error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonSingularJacobian: return "NonSingularJacobian";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnknownModel: return "UnknownModel";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ArityError: return "ArityError";
    case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::SingularDyf: return "SingularDyf";
    case ErrorCode::SingularReducedJacobian: return "SingularReducedJacobian";
    case ErrorCode::NotEquilibrium: return "NotEquilibrium";
    case ErrorCode::NewtonDiverged: return "NewtonDiverged";
    case ErrorCode::SingularNewtonSystem: return "SingularNewtonSystem";
    case ErrorCode::UnsupportedDimensions: return "UnsupportedDimensions";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, std::string(error_name(code)) + ": " + message);
}

}  // namespace lsr
