#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace conley {

// Base for every error raised by the library. The CLI maps subclasses onto
// exit codes: input problems -> 2, numerical failures -> 3, campaign -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class ParseError : public InvalidInput {
 public:
  ParseError(const std::string& what, std::size_t row)
      : InvalidInput("row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class SingularDesign : public NumericalError {
 public:
  SingularDesign(const std::string& what, std::size_t column)
      : NumericalError(what), column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

class NotPositiveDefinite : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InsufficientPairs : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class UndefinedStatistic : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class CampaignError : public Error {
 public:
  using Error::Error;
};

}  // namespace conley
