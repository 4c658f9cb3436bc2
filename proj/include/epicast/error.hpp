#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace epicast {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based; 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class MissingMetadataError : public Error {
 public:
  using Error::Error;
};

/// A NaN or infinity surfaced in a numerical routine.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace epicast
