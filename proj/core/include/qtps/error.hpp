#pragma once

#include <stdexcept>
#include <string>

namespace qtps {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The requested operation is not supported by this object (e.g. a potential
/// without a Laplacian).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Configuration values are invalid or mutually inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numeric routine failed (non-finite values, non-convergence, degeneracy).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A required input file is missing.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A calibration budget produced no valid outcome.
class CalibrationError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// A budget outside the calibrated range was queried.
class ExtrapolationError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Graph construction or traversal failed (connectivity, missing path).
class GraphError : public Error {
 public:
  using Error::Error;
};

/// An upstream artifact was produced under a different configuration.
class ProvenanceError : public Error {
 public:
  using Error::Error;
};

/// Base of failures reported by an annealer backend.
class BackendError : public Error {
 public:
  using Error::Error;
};

class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
};

class TimeoutError : public BackendError {
 public:
  using BackendError::BackendError;
};

class MalformedResponseError : public BackendError {
 public:
  using BackendError::BackendError;
};

}  // namespace qtps
