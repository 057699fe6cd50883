// Checkpoint file: 8-byte magic "VXREGCP1", a little-endian uint32 manifest
// length, a JSON manifest (tensor names and shapes, scalar hyperparameters,
// step count), then raw little-endian float32 payloads in manifest order.
#pragma once

#include <string>

#include "voxreg/network.hpp"

namespace voxreg {

void save_checkpoint(const NetworkParameters& params, const TrainConfig& cfg, const std::string& path);

struct LoadedCheckpoint {
  NetworkParameters params;
  TrainConfig config;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace voxreg
