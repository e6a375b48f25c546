#pragma once

#include <string>
#include <vector>

#include "msar/experiment_config.hpp"

namespace msar {

std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
ExperimentConfig make_preset(const std::string& name);

/// Scene layout of the replication presets on a 32 x 128 grid: a stationary
/// block (upper left), 32.5 m/s at 30 deg (lower left), 4.7 m/s at 120 deg
/// (upper right), `per_object` scatterers each.
std::vector<ObjectSpec> replication_objects(std::size_t per_object);
/// Same three objects scaled down to a 16 x 16 grid.
std::vector<ObjectSpec> desk_objects(std::size_t per_object);
/// Magnitude bands [3, 9] step 3 and [30, 40] step 1 at 30 and 120 deg (29 hypotheses).
std::vector<VelocityGroup> replication_velocity_groups();

}  // namespace msar
