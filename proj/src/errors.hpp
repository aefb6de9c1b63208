#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ionjc {

enum class ErrorKind {
  InvalidArgument,
  TruncationTooSmall,
  DegenerateBlock,
  StepFailure,
  QuadratureNotConverged,
  ParseError,
  ValidationError,
  UnknownPreset,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Numerical failures map to exit code 3, configuration problems to 2.
bool is_config_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Carries the offending line of a config file (1-based).
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& message)
      : Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + message),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// Names the config field that failed validation.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(ErrorKind::ValidationError, field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace ionjc
