#pragma once

#include <string>
#include <vector>

#include "cpsro/psro.hpp"

namespace cpsro {

// Flat key-value config text: one `key = value` per line, dotted sections
// (dqn.*, conflux.*), '#' comments. serialize_config emits every key in a
// fixed order, so load -> serialize -> load is the identity.
std::string serialize_config(const RunConfig& config);
RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::filesystem::path& path);

// `key=value` override; unknown keys raise a ConfigError naming the key.
void apply_override(RunConfig& config, const std::string& key, const std::string& value);

std::vector<std::string> preset_names();
RunConfig preset_config(const std::string& name);

}  // namespace cpsro
