#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace autogmap {

// Base of every error thrown by the library. The CLI maps all of them to
// exit code 2 and prints what() after an "error: " prefix.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Raised when a scheme leaves some nonzero outside every block.
class CoverageError : public Error {
 public:
  CoverageError(std::size_t row, std::size_t col)
      : Error("uncovered nonzero at (" + std::to_string(row) + ", " +
              std::to_string(col) + ")"),
        row_(row),
        col_(col) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class NoSamplesError : public Error {
 public:
  NoSamplesError() : Error("no samples drawn") {}
};

}  // namespace autogmap
