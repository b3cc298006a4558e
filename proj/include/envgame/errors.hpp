#pragma once

#include <stdexcept>
#include <string>

namespace envgame {

// Invalid model parameters, scenario fields, or CLI overrides.
// The message names the offending field.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace envgame
