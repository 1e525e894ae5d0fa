#pragma once

#include <stdexcept>
#include <string>

namespace tvsvm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed specs or arguments.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Inputs outside the domain an operation is defined on.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Non-finite results, divergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NonDifferentiable : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Unreadable or malformed files.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace tvsvm
