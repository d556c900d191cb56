#pragma once

#include <stdexcept>
#include <string>

namespace fdrl {

// Argument outside the mathematical domain of an operation (negative Doppler,
// non-finite input, weights that do not sum to one).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Caller broke an API contract (dimension mismatch, stepping a finished
// episode, updating from an empty buffer).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Invalid experiment configuration. Carries the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Failure reading or writing experiment artifacts.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fdrl
