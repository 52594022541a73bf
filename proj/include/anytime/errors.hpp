#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace anytime {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid problem data handed to a constructor (shapes, symmetry, definiteness).
class ConstructionError : public Error {
 public:
  using Error::Error;
};

// Mismatched vector/matrix dimensions passed to an evaluator.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// An argument outside the mathematical domain of a function (e.g. a negative multiplier).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A barrier evaluation was requested at a point where some f_i(x) >= 0.
class InfeasiblePointError : public DomainError {
 public:
  InfeasiblePointError(std::size_t index, double value);

  std::size_t constraint_index() const { return index_; }
  double constraint_value() const { return value_; }

 private:
  std::size_t index_;
  double value_;
};

// An iterative reference solve hit its iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Malformed experiment configuration. `line` is 0 when the error is not tied to a line.
class ConfigError : public Error {
 public:
  ConfigError(std::size_t line, std::string key, const std::string& message);

  std::size_t line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  std::size_t line_;
  std::string key_;
};

}  // namespace anytime
