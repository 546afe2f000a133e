#pragma once

#include "eaae/bench.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace eaae {

/// Overlays a JSON object onto `config`. Recognized sections: sensor,
/// occupancy, mapping, frontier, viewpoints, planner, limits, quad, gains,
/// rollout, power, policy, termination, observability, mission. Unknown keys
/// and wrong types throw std::invalid_argument naming the key.
void apply_config_json(MissionConfig& config, std::string_view json_text);
void apply_config_file(MissionConfig& config, const std::filesystem::path& path);

/// Every tunable of `config` in the overlay format (scenario excluded).
std::string config_to_json(const MissionConfig& config);

}  // namespace eaae
