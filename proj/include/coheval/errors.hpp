#pragma once

#include <stdexcept>
#include <string>

namespace coheval {

// Base for every error the library raises on purpose. The CLI maps the
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad command line or configuration.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Input data that violates a record contract.
class DataError : public Error {
 public:
  using Error::Error;
};

// Endpoint unreachable, non-retryable status, malformed reply, or retries
// exhausted.
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace coheval
