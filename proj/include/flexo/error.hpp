#ifndef FLEXO_ERROR_HPP
#define FLEXO_ERROR_HPP

#include <stdexcept>
#include <string>

#include "flexo/types.hpp"

namespace flexo {

/// Base class for all toolkit failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bundle decode/encode failures; carries the offending file and field.
class IoError : public Error {
 public:
  IoError(std::string file, std::string field, const std::string& detail)
      : Error(file + " [" + field + "]: " + detail),
        file_(std::move(file)),
        field_(std::move(field)) {}

  const std::string& file() const noexcept { return file_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string file_;
  std::string field_;
};

/// Invariant or precondition violated by caller-supplied data.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Too few distinct depth values to place the requested thresholds.
class DegenerateHistogramError : public Error {
 public:
  using Error::Error;
};

/// Every depth sample in the probe window was the invalid-zero sentinel.
class NoDepthError : public Error {
 public:
  using Error::Error;
};

/// Point projects outside the camera's field of view.
class OutOfFrustumError : public Error {
 public:
  using Error::Error;
};

/// Innovation covariance became numerically singular.
class FilterDivergenceError : public Error {
 public:
  using Error::Error;
};

/// A marker exceeded the permitted run of missed detections.
class TrackLostError : public Error {
 public:
  TrackLostError(MarkerRole role, int frame_index)
      : Error(std::string("track lost: ") + to_string(role) + " at frame " +
              std::to_string(frame_index)),
        role_(role),
        frame_index_(frame_index) {}

  MarkerRole role() const noexcept { return role_; }
  int frame_index() const noexcept { return frame_index_; }

 private:
  MarkerRole role_;
  int frame_index_;
};

/// Required marker role absent from a trial.
class MissingRoleError : public Error {
 public:
  explicit MissingRoleError(MarkerRole role)
      : Error(std::string("missing marker role: ") + to_string(role)),
        role_(role) {}

  MarkerRole role() const noexcept { return role_; }

 private:
  MarkerRole role_;
};

/// Static trial moved too much to serve as a reference.
class UnstableStaticError : public Error {
 public:
  using Error::Error;
};

}  // namespace flexo

#endif  // FLEXO_ERROR_HPP
