#pragma once

#include <stdexcept>
#include <string>

namespace sticky {

// Argument outside the state space or outside an operation's domain
// (negative height, site not in the lattice, n out of range, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation produced a non-finite value or lost all of its mass.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The model itself cannot be normalized (zero or non-finite total mass).
class DegenerateModelError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace sticky
