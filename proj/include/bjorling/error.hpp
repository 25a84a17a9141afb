#pragma once

#include <stdexcept>
#include <string>

namespace bjorling {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text; `position` is a 0-based character offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Domain error during evaluation (division by zero, sqrt/log out of domain).
class EvalError : public Error {
 public:
  using Error::Error;
};

/// A model, curve or field failed one of its invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent job configuration / input file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The v-march was aborted (growth beyond budget, NaN).
class SolverAbort : public Error {
 public:
  SolverAbort(const std::string& what, double v_reached)
      : Error(what), v_reached_(v_reached) {}
  double v_reached() const { return v_reached_; }

 private:
  double v_reached_;
};

}  // namespace bjorling
