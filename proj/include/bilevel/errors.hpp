#pragma once

#include <stdexcept>
#include <string>

namespace bilevel {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (dimension mismatch, point outside the set).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The object cannot provide the requested operation (e.g. exact values of a sampling-only oracle).
class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An internal invariant was broken at runtime (e.g. lambda drifted off the simplex).
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// An iterate became non-finite or left the divergence bound.
class DivergenceError : public Error {
 public:
  DivergenceError(long iteration, const std::string& what)
      : Error("diverged at iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}

  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

}  // namespace bilevel
