#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace riskann {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument or configuration value.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Matrix expected to be symmetric is not.
class SymmetryError : public Error {
 public:
  using Error::Error;
};

/// Cholesky factorization met a non-positive pivot.
class DefinitenessError : public Error {
 public:
  using Error::Error;
};

/// A variable has zero variance and cannot be standardized.
class DegenerateVariableError : public Error {
 public:
  using Error::Error;
};

/// Input file layout does not match the expected schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A row of an input file could not be parsed.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line)
      : Error(message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& message, std::size_t epoch)
      : Error(message), epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace riskann
