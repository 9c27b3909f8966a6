#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace hed {

// Base class for all errors raised by the pipeline.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// File unreadable, unwritable, or missing.
class FileError : public Error {
 public:
  using Error::Error;
};

// Malformed input data: bad JSONL line, schema mismatch, invariant violation.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Invalid run configuration or flag combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-success HTTP status. Carries the status code and a body excerpt.
class HttpError : public Error {
 public:
  HttpError(int status, std::string body_excerpt, const std::string& what)
      : Error(what), status_(status), body_excerpt_(std::move(body_excerpt)) {}

  int status() const { return status_; }
  const std::string& body_excerpt() const { return body_excerpt_; }

  // Retryable statuses: request timeout, rate limit, server errors.
  bool transient() const {
    return status_ == 408 || status_ == 429 || status_ >= 500;
  }

 private:
  int status_;
  std::string body_excerpt_;
};

// Resource (repository, README, endpoint path) does not exist.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Rate limited after retries; surfaces the server's Retry-After when given.
class RateLimitedError : public Error {
 public:
  RateLimitedError(const std::string& what, std::optional<long> retry_after_s)
      : Error(what), retry_after_s_(retry_after_s) {}

  std::optional<long> retry_after_seconds() const { return retry_after_s_; }

 private:
  std::optional<long> retry_after_s_;
};

// Transport-level failure: connect error or timeout. Always transient.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Replay store has no entry for a prompt fingerprint.
class ReplayMissError : public Error {
 public:
  ReplayMissError(const std::string& what, std::string fingerprint)
      : Error(what), fingerprint_(std::move(fingerprint)) {}

  const std::string& fingerprint() const { return fingerprint_; }

 private:
  std::string fingerprint_;
};

inline bool is_transient(const std::exception& e) {
  if (auto* he = dynamic_cast<const HttpError*>(&e)) return he->transient();
  if (dynamic_cast<const TransportError*>(&e)) return true;
  if (dynamic_cast<const RateLimitedError*>(&e)) return true;
  return false;
}

}  // namespace hed
