#pragma once

#include <stdexcept>
#include <string>

namespace demux {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A configuration is incomplete or internally inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Measured data contradict the model (e.g. an efficiency above one).
class DataError : public Error {
 public:
  using Error::Error;
};

/// The data do not determine the requested estimate.
class EstimationError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver failed to converge or hit a degenerate problem.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A stream and a configuration do not describe the same experiment.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace demux
