#pragma once

#include <stdexcept>
#include <string>

namespace gpplan {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Caller passed an argument outside an operation's documented domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// A numeric routine produced a non-finite value or failed to converge.
class NumericError : public Error {
 public:
  using Error::Error;
};

// The measurement covariance factorization is too ill-conditioned to trust.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

// No sample budget satisfies the requested per-stage tolerance.
class BudgetError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// File could not be read, written, or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gpplan
