#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace chris {

enum class ErrorKind {
  InvalidArgument,
  InvalidHr,
  ParseError,
  MissingColumn,
  TraceTooShort,
  NoPeaks,
  ShapeMismatch,
  UncalibratedQuantization,
  EmptyDataset,
  EmptyWindowSet,
  MissingLabels,
  NoFeasibleConfig,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Malformed CSV/JSON input. `row` is the 0-based data row, `line` the 1-based
// line in the file.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::size_t line, std::string column, const std::string& message)
      : Error(ErrorKind::ParseError, "row " + std::to_string(row) + " (line " + std::to_string(line) +
                                         "), column '" + column + "': " + message),
        row_(row),
        line_(line),
        column_(std::move(column)) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t line_;
  std::string column_;
};

}  // namespace chris
