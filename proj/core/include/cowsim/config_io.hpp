#pragma once

#include <string>

#include "cowsim/experiments.hpp"
#include "cowsim/protocol.hpp"

namespace cowsim {

/// Session settings plus the optional "sweep" section of one config file.
struct LoadedConfig {
  SessionConfig session;
  SweepSpec sweep;      // sweep.base mirrors session
  bool has_sweep = false;
};

/// Parses the JSON experiment configuration. Every key is optional and
/// defaults apply, but unknown keys are rejected (ConfigError) at every
/// nesting level, as are malformed values.
LoadedConfig load_config_text(const std::string& json_text);
LoadedConfig load_config_file(const std::string& path);

/// The defaults-populated config document (the schema reference).
std::string default_config_json();

}  // namespace cowsim
