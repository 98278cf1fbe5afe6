#pragma once

#include <stdexcept>
#include <string>

namespace dlinoss {

// Invalid configuration: bad dimensions, malformed config files, unknown keys.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Value outside the mathematical domain of an operation (negative damping,
// eigenvalue outside the unit disk, singular inverse-map target, ...).
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem / serialization failures.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values encountered during evaluation or training.
class DivergedError : public std::runtime_error {
 public:
  explicit DivergedError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dlinoss
