#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace drt {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

// A coordinate has no spread, so it cannot be rescaled to [0,1].
class DegenerateAxisError : public Error {
 public:
  using Error::Error;
};

// Truncation region carries too little Gaussian mass for rejection sampling.
class PathologicalSettingError : public Error {
 public:
  using Error::Error;
};

// The sample sizes / thresholds violate 3*eps0 <= eps1 <= 1 or n1 <= n0.
class InvalidHypothesisError : public Error {
 public:
  using Error::Error;
};

// Violated precondition of an operation (bad sizes, out-of-range parameters).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace drt
