#pragma once

#include <stdexcept>
#include <string>

namespace shapeopt {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or configuration value.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain where a closed-form expression is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A linear or nonlinear solve failed to meet its contract.
class SolverError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace shapeopt
