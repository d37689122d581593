#pragma once

#include "rfse/lmb_filter.hpp"

#include <iosfwd>
#include <string>

namespace rfse {

/// Filter configuration matching the built-in scenario's models: detection
/// probability, clutter, birth locations and the shared dynamic-model
/// constants used throughout the benchmark setups.
LmbFilterConfig scenario_filter_config(int id);

/// Scenario-1 values; baseline for user configs.
LmbFilterConfig default_filter_config();

/// Apply a JSON configuration document on top of `cfg`. Every key mirrors a
/// filter setting; unknown keys raise std::runtime_error.
void apply_config_json(LmbFilterConfig& cfg, std::istream& is);
void apply_config_json(LmbFilterConfig& cfg, const std::string& text);

}  // namespace rfse
