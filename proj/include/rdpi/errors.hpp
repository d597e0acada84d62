#pragma once

#include <stdexcept>
#include <string>

namespace rdpi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative numerical routine (root finder, quadrature, series) did not
/// reach its tolerance.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Invalid arguments or a scenario violating one of its invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration text. `line` is 1-based, 0 when unknown.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// The requested design violates a stability hypothesis of the controller
/// (mode-count threshold or closed-loop pole margin).
class DesignGateError : public Error {
 public:
  using Error::Error;
};

/// The closed-loop integration produced a non-finite state.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double time)
      : Error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

}  // namespace rdpi
