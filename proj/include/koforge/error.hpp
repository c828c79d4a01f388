#pragma once

#include <stdexcept>
#include <string>

namespace koforge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Quadrature, inversion or ODE integration failed to produce a usable value.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace koforge
