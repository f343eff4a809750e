#pragma once

#include <stdexcept>
#include <string>

namespace ggfp {

/// Parameter triple or configuration value outside its admissible range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Evaluation point outside the domain where a quantity is finite.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A mathematical hypothesis (not just a range check) fails for the requested inputs.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure inside a computation that should not fail for valid inputs.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ggfp
