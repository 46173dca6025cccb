#pragma once

#include <stdexcept>
#include <string>

namespace nlqm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidStateError : public Error {
 public:
  using Error::Error;
};

/// A matrix that should be Hermitian is not; carries the max entrywise |M - M^dagger|.
class NotHermitianError : public Error {
 public:
  NotHermitianError(const std::string& what, double residual)
      : Error(what + " (hermiticity residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Carries max entrywise |U^dagger U - 1|.
class NotUnitaryError : public Error {
 public:
  NotUnitaryError(const std::string& what, double residual)
      : Error(what + " (unitarity residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Observable evaluated at (or too close to) its singular set.
class SingularityError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// A trajectory is too short or too coarse for the requested analysis.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace nlqm
