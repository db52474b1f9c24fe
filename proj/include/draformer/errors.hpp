#pragma once

#include <stdexcept>
#include <string>

namespace draformer {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A value lies outside the domain of a pointwise function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A matrix could not be inverted to the required accuracy.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// A series is shorter than an operation needs.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// An input file could not be parsed.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Parsed input is unusable (empty after filtering, missing columns, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

}  // namespace draformer
