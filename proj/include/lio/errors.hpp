// lio - LiDAR-inertial odometry and mapping, header-only
// SPDX-License-Identifier: MIT

#ifndef LIO_ERRORS_HPP
#define LIO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lio {

/// Base class for every error this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A documented precondition was violated by the caller.
struct ContractViolation : Error {
  using Error::Error;
};

/// Timestamps went backwards (or stalled) within a sensor stream.
struct StreamOrderError : Error {
  using Error::Error;
};

/// IMU samples do not cover the interval a scan needs.
struct InsufficientImuError : Error {
  using Error::Error;
};

/// A continuous-time query fell outside the trajectory span.
struct OutOfRangeError : Error {
  using Error::Error;
};

/// Too few scan-to-map correspondences for a meaningful solution.
struct InsufficientCorrespondencesError : Error {
  int count = 0;
  InsufficientCorrespondencesError(const std::string& what, int n)
      : Error(what), count(n) {}
};

/// Cloud too small for the requested neighborhood statistics.
struct DegenerateCloudError : Error {
  using Error::Error;
};

/// Malformed input file; the message names the line or byte offset.
struct ParseError : Error {
  using Error::Error;
};

/// Graph optimization produced non-finite values; the graph was left intact.
struct OptimizationFailedError : Error {
  using Error::Error;
};

/// The pipeline could not continue; the message names scan index and stage.
struct PipelineError : Error {
  using Error::Error;
};

}  // namespace lio

#endif  // LIO_ERRORS_HPP
