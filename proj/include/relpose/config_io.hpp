#pragma once

#include <string>

#include "relpose/scenario.hpp"

namespace relpose {

/// Parses a config document: JSON with // and /* */ comments permitted.
/// Keys mirror the ScenarioConfig field names; matrices are row-major lists.
/// Unknown keys are rejected with their full path.  Missing keys fall back
/// to the ScenarioConfig defaults, except the alignment weight W, which
/// defaults to the identity sized for the configured features.  The returned
/// config is fully validated.
ScenarioConfig parse_config(const std::string& text);

/// parse_config over a file's contents.  Throws IoError when the file cannot
/// be read; config problems carry the path.
ScenarioConfig load_config(const std::string& path);

/// Serializes every field, two-space indented.  Numbers survive the trip:
/// parse_config(serialize_config(c)) reproduces c bit for bit.
std::string serialize_config(const ScenarioConfig& config);

/// serialize_config into a file.  Throws IoError when unwritable.
void save_config(const ScenarioConfig& config, const std::string& path);

}  // namespace relpose
