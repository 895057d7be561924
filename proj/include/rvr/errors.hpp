#pragma once

#include <stdexcept>
#include <string>

namespace rvr {

// Root of every error raised by the library. Each subclass maps to one
// failure category so callers (and the CLI exit-code table) can dispatch on it.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class BasePointMismatch : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class OutOfInjectivityRadius : public Error {
 public:
  using Error::Error;
};

class LeastSquaresSingular : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class LineSearchError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class DegenerateSpectrum : public Error {
 public:
  using Error::Error;
};

}  // namespace rvr
