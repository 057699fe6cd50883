// JSON run configuration consumed by the CLI; command-line flags override
// file values.
#pragma once

#include <string>

#include "voxreg/network.hpp"
#include "voxreg/simulator.hpp"

namespace voxreg {

struct RunConfig {
  SimulatorConfig simulator;
  TrainConfig train;
  std::string dataset_dir;
  std::string atlas_dir;
  std::string output_dir;
  std::uint64_t seed = 0;
};

// Parses the JSON file; unknown keys are rejected. Referenced dataset/atlas
// paths must exist. A top-level "seed" propagates to the simulator and
// trainer unless they set their own.
RunConfig load_run_config(const std::string& path);

}  // namespace voxreg
