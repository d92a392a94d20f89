#pragma once

#include <stdexcept>
#include <string>

namespace tcatch {

// Base class for every error raised by the library. The CLI maps each
// subclass to its own exit code.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Unreadable or malformed files.
class IoError : public Error {
public:
  using Error::Error;
};

// Shape, index, or size mismatches between arguments.
class DimensionError : public Error {
public:
  using Error::Error;
};

// Well-formed input that violates a modelling precondition
// (missing class, n inconsistent across files, covariate presence, ...).
class DataError : public Error {
public:
  using Error::Error;
};

// Singular or non-positive-definite matrices and similar failures.
class NumericalError : public Error {
public:
  using Error::Error;
};

} // namespace tcatch
