#pragma once

#include <stdexcept>
#include <string>

namespace rpres {

// Failure categories. The CLI maps Validation to exit code 2 and
// Numerical to exit code 3.
enum class ErrorCategory { Validation, Numerical };

enum class ErrorKind {
  InvalidArgument,
  Divergence,
  DegenerateVariance,
  EmptyDomain,
  LagTooLong,
  ZeroMass,
  ZeroEigenvalue,
  NonConvergence,
  EmptyPairing,
  Normalization,
  Regime,
  Length,
  Io,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  ErrorCategory category() const noexcept {
    switch (kind_) {
    case ErrorKind::Divergence:
    case ErrorKind::DegenerateVariance:
    case ErrorKind::ZeroEigenvalue:
    case ErrorKind::NonConvergence:
    case ErrorKind::EmptyPairing:
    case ErrorKind::Normalization:
      return ErrorCategory::Numerical;
    default:
      return ErrorCategory::Validation;
    }
  }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

} // namespace rpres
