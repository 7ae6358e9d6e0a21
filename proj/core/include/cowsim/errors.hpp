#pragma once

#include <stdexcept>
#include <string>

namespace cowsim {

/// Raised when a statistic (visibility, QBER) is requested from an empty
/// conditioning set. Sessions convert it into an "undefined" report marker.
class InsufficientStatisticsError : public std::runtime_error {
 public:
  explicit InsufficientStatisticsError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Configuration file / schema violations (unknown key, bad enum, bad range).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cowsim
