#pragma once

#include <stdexcept>
#include <string>

namespace moe {

/// Malformed or unreadable tensor file.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid scenario or command configuration.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A request that is well-formed but cannot be satisfied for the given data,
/// e.g. a CP rank larger than the tensor supports.
class InfeasibleError : public std::invalid_argument {
 public:
  explicit InfeasibleError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace moe
