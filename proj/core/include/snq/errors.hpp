#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace snq {

/// Base class for all errors raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Regression geometry is unusable: fewer than three positions, or all
/// distances equal (zero abscissa variance).
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

/// |D2S| fell below the configured epsilon while a comfort distance (or its
/// partial derivatives) was requested.
class ZeroDecayError : public Error {
 public:
  using Error::Error;
};

/// A field provider was queried outside its declared domain.
class FieldDomainError : public Error {
 public:
  using Error::Error;
};

class InsufficientSamplesError : public Error {
 public:
  using Error::Error;
};

class InsufficientPathsError : public Error {
 public:
  using Error::Error;
};

/// A synthetic office spec is internally inconsistent (e.g. a requested
/// comfort distance that contradicts the requested decay and 4-m level).
class InfeasibleSpecError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries a 1-based line number (0 = not applicable)
/// and the offending field name when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line = 0, std::string field = {})
      : Error(message), line_(line), field_(std::move(field)) {}

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

}  // namespace snq
