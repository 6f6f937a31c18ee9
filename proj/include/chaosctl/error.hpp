#pragma once

#include <stdexcept>
#include <string>

namespace chaosctl {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A state was outside the map's domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The map escaped its state domain (logistic map with r > 4).
class UnboundedTrajectory : public Error {
 public:
  using Error::Error;
};

class NoRootError : public Error {
 public:
  using Error::Error;
};

class NoOrbitError : public Error {
 public:
  using Error::Error;
};

/// A control law was configured against one of its preconditions.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// More than one orbit component matched an activation test.
class AmbiguityError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// |u_k| exceeded the effort bound delta in strict mode.
class EffortViolation : public Error {
 public:
  using Error::Error;
};

/// r0 + u_k left the admissible parameter range in strict mode.
class ParameterRangeError : public EffortViolation {
 public:
  using EffortViolation::EffortViolation;
};

class SingularSensitivity : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

/// Malformed experiment configuration or command-line input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace chaosctl
