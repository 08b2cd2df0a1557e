#pragma once

#include <stdexcept>
#include <string>

namespace dol {

/// Error categories surfaced by the CLI as machine-readable tags.
enum class ErrorCategory {
  domain,
  bracket,
  convergence,
  integration,
  data,
  config,
  fit,
  io,
};

const char* to_string(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message) : Error(ErrorCategory::domain, message) {}
};

class BracketError : public Error {
 public:
  explicit BracketError(const std::string& message) : Error(ErrorCategory::bracket, message) {}
};

class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& message)
      : Error(ErrorCategory::convergence, message) {}
};

class IntegrationError : public Error {
 public:
  explicit IntegrationError(const std::string& message)
      : Error(ErrorCategory::integration, message) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& message) : Error(ErrorCategory::data, message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error(ErrorCategory::config, message) {}
};

class FitError : public Error {
 public:
  explicit FitError(const std::string& message) : Error(ErrorCategory::fit, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorCategory::io, message) {}
};

}  // namespace dol
