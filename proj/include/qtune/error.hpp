#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qtune {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid search space, configuration or encoding request.
class SpaceError : public Error {
 public:
  using Error::Error;
};

// Malformed text input. line() is 1-based; 0 means "whole input".
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that is inconsistent with what it declares.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Invalid numeric argument (non-finite values, out-of-range parameters).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Raised when a training step produced non-finite gradients. The step is
// discarded; the network keeps its previous weights.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// An agent attempted more surface evaluations than it was granted.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace qtune
