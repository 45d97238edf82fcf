#pragma once

#include <stdexcept>
#include <string>

namespace bubblelink {

// Base of every error raised by the library. Validation failures map to
// exit code 2 in the CLI, I/O failures to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters (timing, channel, filter, config keys).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A value violates a domain-type invariant (sorted schedule, bit alphabet, ...).
class InvariantError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents: bad header, non-numeric cell, non-uniform spacing.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A file had a header but no data rows where at least one is required.
class EmptyInputError : public FormatError {
 public:
  using FormatError::FormatError;
};

class UnsupportedModeError : public Error {
 public:
  using Error::Error;
};

// A ratio whose denominator is zero (e.g. BER with no transmitted peaks).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

// A computation would exceed a configured size cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace bubblelink
