// The displacement-field estimation network: a 3D U-Net with a four-level
// stride-2 encoder (channels 16, 32, 32, 32), two 32-channel bottleneck
// convolutions, a trilinear-upsampling decoder (32, 32, 32, 16) with skip
// concatenations, a 16-channel penultimate convolution whose activation is
// the feature map consumed by the residual segmentation head, and a
// zero-initialized 3-channel field head so training starts at the identity
// transform.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "voxreg/nn_ops.hpp"
#include "voxreg/tensor.hpp"
#include "voxreg/types.hpp"

namespace voxreg {

enum class TrainMode { kReg, kMtl, kFeat };

TrainMode train_mode_from_string(const std::string& s);
std::string to_string(TrainMode m);

struct TrainConfig {
  double lambda = 10.0;  // similarity-loss weight
  double beta = 10.0;    // segmentation-loss weight
  double learning_rate = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int epochs = 1;
  int nlcc_window = 5;
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::kReg;
  // Ablation switch: keep the plain warped-label overlap term next to the
  // residual-head term in FEAT mode.
  bool feat_keep_warped_term = true;

  void validate() const;
};

struct NetworkParameters {
  std::vector<TensorPtr> enc_w, enc_b;  // 4 stride-2 levels
  TensorPtr mid1_w, mid1_b, mid2_w, mid2_b;
  std::vector<TensorPtr> dec_w, dec_b;  // 4 upsample+concat+conv blocks
  TensorPtr pen_w, pen_b;               // penultimate 16-channel convolution
  TensorPtr head_w, head_b;             // 3-channel field head, zero-initialized
  TensorPtr seg_w, seg_b;               // residual segmentation head (optional)
  int seg_classes = 0;
  std::int64_t step_count = 0;

  bool has_seg_head() const { return seg_classes > 0; }
  // Fixed naming/order used by the checkpoint format and the optimizer.
  std::vector<std::pair<std::string, TensorPtr>> named_tensors() const;
  std::vector<TensorPtr> tensors() const;
};

// Fan-in-scaled uniform initialization for all kernels except the field head
// (zeroed); biases start at zero. seg_classes > 0 also creates the residual
// segmentation head.
NetworkParameters make_network_parameters(std::uint64_t seed, int seg_classes = 0);

struct NetworkOutput {
  TensorPtr field;  // {3, D, H, W}
  TensorPtr feat;   // {16, D, H, W} penultimate activation
};

// Moving and fixed images are concatenated as two input channels. Dims must
// match and be divisible by 16.
NetworkOutput forward_network(Tape& tape, const NetworkParameters& params, const Volume& moving,
                              const Volume& fixed);

// Softmax(conv([feat, s0])): one 3^3 convolution over the concatenation of
// the 16-channel feature map and the C warped label planes.
TensorPtr residual_seg_head(Tape& tape, const NetworkParameters& params, const TensorPtr& feat,
                            const TensorPtr& s0);

// Inference convenience: runs the forward pass and extracts the field.
DisplacementField predict_field(const NetworkParameters& params, const Volume& moving, const Volume& fixed);

}  // namespace voxreg
