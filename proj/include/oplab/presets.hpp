#pragma once

#include <string>
#include <vector>

#include "oplab/scenario.hpp"

namespace oplab {

// Named scenario catalogue: one entry per case study, plus the parameter
// variants those studies sweep. Unknown names raise ConfigError listing the
// catalogue.
ScenarioConfig preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace oplab
