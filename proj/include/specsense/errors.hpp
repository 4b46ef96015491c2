#pragma once

#include <stdexcept>

namespace specsense {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A request for zero items where at least one is required.
struct EmptyRequestError : Error {
  using Error::Error;
};

/// A parameter value outside its admissible domain.
struct DomainError : Error {
  using Error::Error;
};

/// Input length not supported by the transform (must be a power of two).
struct UnsupportedLengthError : Error {
  using Error::Error;
};

/// A frame source ran out while the detector still needed a frame.
struct InsufficientDataError : Error {
  using Error::Error;
};

/// Too few calibration trials for the requested quantile.
struct InsufficientTrialsError : Error {
  using Error::Error;
};

/// Threshold bisection could not reach the target false-alarm rate.
struct CalibrationRangeError : Error {
  using Error::Error;
};

/// Inconsistent or incomplete run configuration.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace specsense
