#pragma once

#include <stdexcept>
#include <string>

namespace mtf {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

/// A popularity law or profile that cannot drive the chain (zero mean, all weights zero).
class DegenerateLaw : public Error {
 public:
  using Error::Error;
};

/// An integrand or target function returned a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature ran out of subdivisions; carries the best estimate it reached.
class ToleranceNotMet : public Error {
 public:
  ToleranceNotMet(const std::string& what, double estimate, double error_estimate)
      : Error(what), estimate_(estimate), error_estimate_(error_estimate) {}

  double estimate() const noexcept { return estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double estimate_;
  double error_estimate_;
};

/// Problem size over a configured cap (exact laws are cubic in n).
class SizeError : public Error {
 public:
  using Error::Error;
};

/// A constructed object failed its own consistency checks.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// A file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mtf
