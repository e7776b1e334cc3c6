#pragma once

#include <stdexcept>
#include <string>

namespace biopt {

struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct CapabilityError : std::logic_error {
  using std::logic_error::logic_error;
};

// Point outside dom f; index is the offending row (or -1).
struct DomainError : std::domain_error {
  DomainError(const std::string& what, int index = -1) : std::domain_error(what), index(index) {}
  int index;
};

struct NumericalError : std::runtime_error {
  NumericalError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual(residual) {}
  double residual;
};

struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& what, double ratio = 0.0)
      : std::runtime_error(what), ratio(ratio) {}
  double ratio;
};

struct CertificateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace biopt
