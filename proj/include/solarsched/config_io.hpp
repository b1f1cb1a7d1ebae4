#pragma once

#include <string>

#include "solarsched/domain.hpp"

namespace solarsched {

// Loads a SystemConfig from a plain-text key=value file. Recognized keys:
//   bandwidth_hz, noise_density, slot_length_s, slots_per_frame,
//   gateway_path_loss_db (comma-separated dB list), epsilon_time_s
// Unknown keys raise ParseError; missing keys keep their defaults.
// The result is validated before returning.
SystemConfig load_system_config(const std::string& path);

void save_system_config(const SystemConfig& cfg, const std::string& path);

}  // namespace solarsched
