#pragma once

#include <stdexcept>
#include <string>

namespace conceptsig {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: bad dimensions, invalid specs, unparsable files.
class InputError : public Error {
 public:
  using Error::Error;
};

// A numerical routine failed (eigensolver, non-convergence, calibration).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace conceptsig
