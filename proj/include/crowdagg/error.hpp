#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crowdagg {

// Base for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A cell or token in an input file could not be parsed. Row and column are
// 1-based positions in the source file (header is row 1).
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t row, std::size_t column, const std::string& what)
      : Error(file + ":" + std::to_string(row) + ":" + std::to_string(column) + ": " + what),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

// Input files are individually well formed but disagree with each other or
// with the expected layout (missing ids, empty file, ragged rows).
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or hyperparameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Arguments outside an operation's domain (empty vote, size > P, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class TrainingDivergence : public Error {
 public:
  explicit TrainingDivergence(std::size_t epoch)
      : Error("training diverged: non-finite loss at epoch " + std::to_string(epoch)), epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace crowdagg
