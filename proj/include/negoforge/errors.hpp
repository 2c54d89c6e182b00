#pragma once

#include <stdexcept>
#include <string>

namespace negoforge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Outcome does not match the issue structure of a profile/problem.
class InvalidOutcomeError : public Error {
 public:
  using Error::Error;
};

// Outcome space larger than the configured enumeration cap.
class EnumerationCapError : public Error {
 public:
  using Error::Error;
};

// Malformed problem, generator or opponent specification.
class SpecError : public Error {
 public:
  using Error::Error;
};

// Invalid agent configuration or optimizer setup.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class InsufficientSamplesError : public Error {
 public:
  using Error::Error;
};

class IncompleteMatrixError : public Error {
 public:
  using Error::Error;
};

// File content does not follow the declared schema. The message carries the
// JSON path (or CSV line) of the offending field.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace negoforge
