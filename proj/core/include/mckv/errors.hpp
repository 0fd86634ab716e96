#pragma once

#include <stdexcept>
#include <string>

namespace mckv {

// Bad model parameters, malformed config files, unknown identifiers.
// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure at run time: solver divergence, SDE blow-up,
// overflow guards. The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mckv
