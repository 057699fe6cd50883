// Adam parameter updates with bias correction.
#pragma once

#include <vector>

#include "voxreg/network.hpp"
#include "voxreg/tensor.hpp"

namespace voxreg {

struct AdamState {
  std::vector<std::vector<double>> m;  // first moments, one entry per tensor
  std::vector<std::vector<double>> v;  // second moments
  std::int64_t step = 0;
};

// Single-tensor update; t is the 1-based step count.
void adam_update(std::vector<double>& values, const std::vector<double>& grads,
                 std::vector<double>& m, std::vector<double>& v, std::int64_t t,
                 double lr, double beta1, double beta2, double eps);

// Applies one Adam step to every tensor, reading gradients accumulated by the
// backward pass. Moment buffers are created lazily on the first call.
void adam_step(const std::vector<TensorPtr>& params, AdamState& state, const TrainConfig& cfg);

void zero_grads(const std::vector<TensorPtr>& params);

}  // namespace voxreg
