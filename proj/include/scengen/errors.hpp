#pragma once

#include <stdexcept>
#include <string>

namespace scengen {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input files / configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data violates a documented invariant (bad CSV, non-finite value,
// duplicated timestamp, capacity violation, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// An hour inside a unit's span has no sub-hourly samples.
class EmptyHourError : public DataError {
 public:
  using DataError::DataError;
};

// Actuals and forecasts have no complete day in common.
class NoOverlapError : public DataError {
 public:
  using DataError::DataError;
};

// A requested unit is missing from a data source.
class UnitMismatchError : public DataError {
 public:
  using DataError::DataError;
};

// Even the in-sample fallback window has fewer days than the minimum.
class InsufficientHistoryError : public DataError {
 public:
  using DataError::DataError;
};

// A sample with zero spread was given to a distribution fitter.
class DegenerateSampleError : public DataError {
 public:
  using DataError::DataError;
};

// A data matrix column has zero variance.
class ZeroVarianceError : public DataError {
 public:
  using DataError::DataError;
};

// A matrix that must be positive (semi)definite is not.
class NotPsdError : public Error {
 public:
  using Error::Error;
};

// A unit has no coordinates but a distance-based penalty was requested.
class MissingCoordinatesError : public DataError {
 public:
  using DataError::DataError;
};

// A S A^T is singular even after dropping dependent constraint rows.
class SingularConstraintError : public Error {
 public:
  using Error::Error;
};

// All solar actuals are zero: no diurnal range exists.
class NoDaylightError : public DataError {
 public:
  using DataError::DataError;
};

// An iterative estimator hit its sweep limit without meeting its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace scengen
