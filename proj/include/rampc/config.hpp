#pragma once

#include "rampc/harness.hpp"

#include <string>

namespace rampc {

/// Parses the single JSON configuration document (sections: bounds, mpc,
/// solver, trajectories, plant). Missing keys keep the benchmark defaults.
HarnessConfig config_from_json(const std::string& text);

HarnessConfig load_config(const std::string& path);

std::string config_to_json(const HarnessConfig& cfg);

} // namespace rampc
