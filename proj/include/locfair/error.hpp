#pragma once

#include <stdexcept>
#include <string>

namespace locfair {

/// Base class for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not fit the operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A value left the domain an operation is defined on (non-finite loss,
/// probability outside (0,1), ...).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Dataset schema does not match the data it is applied to.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Serialized data is malformed (bad magic, version, checksum, truncation).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace locfair
