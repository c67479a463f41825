#pragma once

#include <stdexcept>
#include <string>

namespace vopi {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
public:
  using Error::Error;
};

// A CSV header is missing a required column; column() names it.
class SchemaError : public Error {
public:
  explicit SchemaError(std::string column)
      : Error("missing column: " + column), column_(std::move(column)) {}
  const std::string& column() const noexcept { return column_; }

private:
  std::string column_;
};

// A data cell failed to parse; row() is 1-based and counts the header.
class ParseError : public Error {
public:
  ParseError(std::size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

private:
  std::size_t row_;
};

class ShapeError : public Error {
public:
  using Error::Error;
};

class NumericError : public Error {
public:
  using Error::Error;
};

class InfeasibleError : public Error {
public:
  using Error::Error;
};

class LookupError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace vopi
