#pragma once

#include <stdexcept>
#include <string>

namespace klish {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or inconsistent shapes supplied by the caller.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, parsed or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Optimizer divergence, non-finite values, eigen-solver failure.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace klish
