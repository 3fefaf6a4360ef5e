#pragma once

#include <stdexcept>
#include <string>

namespace namesim {

/// Base of every error the library throws. The CLI maps the subclasses onto
/// exit codes: InvalidArgument -> 2, IoError -> 3, NumericalError -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Divergence, singular covariance, non-finite values.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace namesim
