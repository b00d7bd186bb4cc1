// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MPRNN_ERROR_H_
#define MPRNN_ERROR_H_

#include <sstream>
#include <stdexcept>
#include <string>

namespace mprnn {

// Base class for every error raised by the library. The subclasses map onto
// the command-line exit codes (usage 2, I/O 3, numeric 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument, shape, or configuration value.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// File missing, truncated, or malformed.
class IoError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf in parameters or loss.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace mprnn

#define MPRNN_CHECK(cond, msg)                                  \
  do {                                                          \
    if (!(cond)) {                                              \
      std::ostringstream mprnn_check_os_;                       \
      mprnn_check_os_ << msg;                                   \
      throw ::mprnn::InvalidArgument(mprnn_check_os_.str());    \
    }                                                           \
  } while (0)

#endif  // MPRNN_ERROR_H_
