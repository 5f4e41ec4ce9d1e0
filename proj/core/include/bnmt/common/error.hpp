#pragma once

#include <stdexcept>
#include <string>

namespace bnmt {

// Root of all library errors. The CLI maps the subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad invocation or a precondition the caller controls (exit code 1).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed, inconsistent or insufficient input data (exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

// A quantity is undefined or a computation failed numerically (exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace bnmt
