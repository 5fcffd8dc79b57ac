#pragma once

#include <stdexcept>
#include <string>

namespace collab {

// Precondition violated by the caller (bad sizes, out-of-range arguments,
// malformed probability vectors, oracle size guards).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// A numerical routine failed to converge or met a non-finite value.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed run configuration (CLI layer).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace collab
