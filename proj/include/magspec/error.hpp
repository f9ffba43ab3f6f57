#pragma once

#include <stdexcept>
#include <string>

namespace magspec {

/// Base class for all toolkit failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An iterative or direct solver failed to deliver a result.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// A hypothesis required by the asymptotic analysis does not hold on the data.
class AssumptionError : public Error {
 public:
  using Error::Error;
};

/// The computational box is too small for the localized state it must hold.
class BoxTooSmallError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace magspec
