#pragma once

#include <string>

#include "swimtrack/config.hpp"
#include "swimtrack/env.hpp"

namespace swimtrack::harness {

// Named scenario presets. Unknown names are rejected.
inline constexpr const char* kScenarioNominal = "nominal";
inline constexpr const char* kScenarioHighDamping = "high_damping_negative_buoyancy";
inline constexpr const char* kScenarioLegFault = "right_rear_leg_fault";

// Builds the full parameter set from the flat config, then applies the named
// scenario's overrides (damping/buoyancy stress or the dead right-rear leg).
ScenarioParams load_scenario(const Config& cfg, const std::string& scenario);

// The nominal parameter set with no config file involved.
ScenarioParams default_scenario();

}  // namespace swimtrack::harness
