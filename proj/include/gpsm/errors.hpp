#pragma once

#include <stdexcept>
#include <string>

namespace gpsm {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments, dimensions or configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical failures: overflow, enumeration cap exceeded, near-singular channel.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Raised by the ZF precoder when the Gram matrix fails the acceptance gates;
/// callers resample the channel.
class NearSingularError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// File input/output failures; message carries the offending path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gpsm
