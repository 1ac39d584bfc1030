#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gpregime {

enum class ErrorKind {
  InvalidParameter,
  DomainTooSmall,
  InvalidDomain,
  SolverFailure,
  InvalidRegime,
  ResourceLimit,
  InvalidCoefficients,
  InvalidInput,
  ConfigError,
};

std::string_view to_string(ErrorKind kind);

/// Exception carrying a machine-readable kind. Solver failures also carry the
/// last residual so callers can report it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, double residual = 0.0);

  ErrorKind kind() const noexcept { return kind_; }
  double residual() const noexcept { return residual_; }

 private:
  ErrorKind kind_;
  double residual_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what, double residual = 0.0);

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace gpregime
