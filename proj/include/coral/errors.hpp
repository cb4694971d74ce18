// Error taxonomy shared by the library and the CLI exit-code map.
#pragma once

#include <stdexcept>
#include <string>

namespace coral {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad caller-supplied values: malformed files, invalid flags, out-of-range
/// arguments. Mapped to exit code 2 by the CLI.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Dimension or length mismatch between operands.
class ShapeError : public InputError {
 public:
  using InputError::InputError;
};

/// Unreadable or syntactically invalid file content.
class ParseError : public InputError {
 public:
  using InputError::InputError;
};

/// Failure to read or write a path.
class IoError : public InputError {
 public:
  using InputError::InputError;
};

/// Numerically infeasible request (singular covariance, indefinite matrix
/// where PSD is required). Mapped to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Dataset composition violates the evaluation protocol (missing classes,
/// too few examples per class). Mapped to exit code 4.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace coral
