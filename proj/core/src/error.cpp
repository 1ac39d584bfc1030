#include "gpregime/error.hpp"

namespace gpregime {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::DomainTooSmall: return "domain-too-small";
    case ErrorKind::InvalidDomain: return "invalid-domain";
    case ErrorKind::SolverFailure: return "solver-failure";
    case ErrorKind::InvalidRegime: return "invalid-regime";
    case ErrorKind::ResourceLimit: return "resource-limit";
    case ErrorKind::InvalidCoefficients: return "invalid-coefficients";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::ConfigError: return "config-error";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what, double residual)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what),
      kind_(kind),
      residual_(residual) {}

void fail(ErrorKind kind, const std::string& what, double residual) {
  throw Error(kind, what, residual);
}

}  // namespace gpregime
