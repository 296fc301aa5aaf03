#pragma once

#include <string>
#include <vector>

#include "apa/config.hpp"

namespace apa {

/// Names of the built-in experiment presets, in a stable order.
std::vector<std::string> preset_names();

/// Throws ConfigError("preset", ...) for an unknown name.
ExperimentConfig preset(const std::string& name);

}  // namespace apa
