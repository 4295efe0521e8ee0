#pragma once

#include <stdexcept>
#include <string>

namespace cml {

/// Invalid experiment configuration (bad key, grid, or flag value).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or unreadable input data.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cml
