#pragma once

#include <stdexcept>
#include <string>

namespace cqgen {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid RunConfig / BackendConfig / CLI combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Catalog file cannot be parsed or violates a catalog invariant.
// line() is 1-based when known, -1 otherwise.
class CatalogError : public Error {
 public:
  explicit CatalogError(const std::string& what, int line = -1)
      : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Dataset / submission / label file violates the documented schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// An operation was called outside its documented preconditions.
class UsageError : public Error {
 public:
  using Error::Error;
};

// A backend could not produce a reply (transport failure, exhausted
// script, retries spent). attempts() is how many requests were issued.
class BackendError : public Error {
 public:
  explicit BackendError(const std::string& what, int attempts = 1)
      : Error(what), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

// Remote endpoint answered with a non-retryable HTTP status.
class ApiError : public BackendError {
 public:
  ApiError(const std::string& what, int status, std::string body_excerpt)
      : BackendError(what), status_(status), body_(std::move(body_excerpt)) {}
  int status() const { return status_; }
  const std::string& body_excerpt() const { return body_; }

 private:
  int status_;
  std::string body_;
};

// Backend produced a syntactically valid but empty assistant message.
class EmptyReplyError : public BackendError {
 public:
  using BackendError::BackendError;
};

}  // namespace cqgen
