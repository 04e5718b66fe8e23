#pragma once

#include <stdexcept>
#include <string>

namespace ccbox {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration value.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Query outside a tabulated or allowed domain.
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

/// Compton kinematics give |cos theta| > 1.
class UnphysicalEventError : public Error {
 public:
  using Error::Error;
};

/// Scatter and absorber positions too close to define a cone axis.
class DegenerateAxisError : public Error {
 public:
  using Error::Error;
};

/// Total deposit below the trigger threshold; the event is dropped.
class SubThresholdError : public Error {
 public:
  using Error::Error;
};

/// Map with no positive pixel where one is required.
class EmptyMapError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

/// Malformed binary file (magic, header, payload length).
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ccbox
