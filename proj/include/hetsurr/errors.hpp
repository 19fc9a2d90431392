#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace hetsurr {

// Root of every error thrown by the library. Each subclass maps to a distinct
// CLI exit status (see tools/hetsurr.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

// Caller passed an argument outside the operation's domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "argument"; }
};

// Column mapping or configuration file is incomplete or inconsistent.
class SchemaError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "schema"; }
};

// A CSV cell could not be read as a finite number.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t row, std::string column)
      : Error(message), row_(row), column_(std::move(column)) {}
  const char* kind() const noexcept override { return "parse"; }
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

// A value parsed fine but violates a domain constraint (e.g. group not 0/1).
class DomainError : public Error {
 public:
  DomainError(const std::string& message, std::size_t row)
      : Error(message), row_(row) {}
  const char* kind() const noexcept override { return "domain"; }
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// Dataset is well-formed but unusable, e.g. an empty treatment arm.
class ValidationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "validation"; }
};

// Not enough rows to fit a learner. `component` names the T-learner piece
// (lambda0, mu1, ...) when known.
class InsufficientDataError : public Error {
 public:
  InsufficientDataError(const std::string& message, std::string component = {})
      : Error(component.empty() ? message : component + ": " + message),
        component_(std::move(component)) {}
  const char* kind() const noexcept override { return "insufficient_data"; }
  const std::string& component() const noexcept { return component_; }

 private:
  std::string component_;
};

// Numerical failure during fitting.
class FitError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "fit"; }
};

}  // namespace hetsurr
