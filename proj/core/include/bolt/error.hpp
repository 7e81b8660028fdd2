#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace bolt {

// Base of every error raised by the library. `code` is a stable machine-readable
// identifier; `field` optionally names the offending input (e.g. "space.lower[1]").
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message, std::optional<std::string> field = std::nullopt)
      : std::runtime_error(message), code_(std::move(code)), field_(std::move(field)) {}

  const std::string& code() const noexcept { return code_; }
  const std::optional<std::string>& field() const noexcept { return field_; }

 private:
  std::string code_;
  std::optional<std::string> field_;
};

class DimensionError : public Error {
 public:
  DimensionError(const std::string& message, std::optional<std::string> field = std::nullopt)
      : Error("dimension_mismatch", message, std::move(field)) {}
};

class ValidationError : public Error {
 public:
  ValidationError(const std::string& message, std::optional<std::string> field = std::nullopt)
      : Error("validation_error", message, std::move(field)) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t byte_offset)
      : Error("parse_error", message), byte_offset_(byte_offset) {}
  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, std::optional<std::string> field = std::nullopt)
      : Error("config_error", message, std::move(field)) {}
};

// Raised when a covariance matrix stays indefinite after the full jitter ladder.
class NotPositiveDefiniteError : public Error {
 public:
  NotPositiveDefiniteError(const std::string& message, double attempted_jitter)
      : Error("not_positive_definite", message), jitter_(attempted_jitter) {}
  double attempted_jitter() const noexcept { return jitter_; }

 private:
  double jitter_;
};

class OptimizationError : public Error {
 public:
  explicit OptimizationError(const std::string& message) : Error("optimization_failed", message) {}
};

class VersionError : public Error {
 public:
  VersionError(int expected, int found)
      : Error("schema_version_mismatch", "record schema_version " + std::to_string(found) +
                                             " is not supported (expected " + std::to_string(expected) + ")",
              "schema_version") {}
};

class NotFoundError : public Error {
 public:
  explicit NotFoundError(const std::string& message) : Error("not_found", message) {}
};

class ConflictError : public Error {
 public:
  explicit ConflictError(const std::string& message) : Error("conflict", message) {}
};

}  // namespace bolt
