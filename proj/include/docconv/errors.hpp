#pragma once

#include <stdexcept>
#include <string>

namespace docconv {

// Bad shapes, bad hyperparameters, inconsistent files: the caller's fault.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Input data that cannot be turned into a corpus (missing paths, empty
// documents, malformed rows).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values where finite ones are required.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace docconv
