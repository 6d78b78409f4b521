#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace autobid {

// Invalid argument to a numerical or mechanism routine.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// Operation invoked on an object in the wrong lifecycle state
// (e.g. stepping a finished episode).
class StateError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

// Malformed CSV row. Line and column are 1-based.
class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + what),
        line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

// Header or file layout does not match the expected schema.
class SchemaError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Non-finite loss or similar numerical failure during optimisation.
class TrainingError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace autobid
