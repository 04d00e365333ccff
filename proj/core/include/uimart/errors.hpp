#pragma once

#include <stdexcept>
#include <string>

namespace uimart {

// Bad argument to a library operation (precondition violation).
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Request would exceed a configured size limit (grid length, enumeration depth).
class ResourceLimit : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// An empirical source does not cover the requested index.
class InsufficientData : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Invalid experiment configuration; carries the offending field name.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

  private:
    std::string field_;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Malformed command line (unknown query, wrong argument count).
class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace uimart
