#pragma once

#include <stdexcept>
#include <string>

namespace spinbus {

// Every error raised by the core derives from Error; the C layer maps the
// concrete type onto a status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument: out-of-range sites, length mismatches, bad sectors.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A dense path was asked for a problem larger than the configured cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// The iterative eigensolver ran out of restarts.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

/// An operation needs data the object does not carry (e.g. eigenvectors).
class StateError : public Error {
 public:
  using Error::Error;
};

/// Operation called on the wrong kind of system (odd vs even bus).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace spinbus
