#pragma once

#include <stdexcept>
#include <string>

namespace willmore {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point or surface leaves the coordinate ball B_rho.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed model, option or config input.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Field sampled on a grid that does not match the geometry.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// det(gamma) <= 0 somewhere on the parameter grid.
class ImmersionError : public Error {
 public:
  using Error::Error;
};

/// Mean curvature is not strictly positive where H > 0 is required.
class HypothesisViolation : public Error {
 public:
  using Error::Error;
};

/// Consistency check inside a numerical routine failed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace willmore
