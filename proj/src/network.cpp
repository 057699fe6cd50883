#include "voxreg/network.hpp"

#include <cmath>

#include "voxreg/rng.hpp"

namespace voxreg {

namespace {

constexpr double kLeakySlope = 0.2;
constexpr int kEncChannels[4] = {16, 32, 32, 32};
constexpr int kDecChannels[4] = {32, 32, 32, 16};
constexpr int kFeatChannels = 16;

TensorPtr init_kernel(int cout, int cin, RandomStream& rng) {
  TensorPtr w = make_tensor({cout, cin, 3, 3, 3}, true);
  const double bound = std::sqrt(6.0 / (cin * 27.0));
  for (double& v : w->value) v = rng.uniform(-bound, bound);
  return w;
}

TensorPtr zero_kernel(int cout, int cin) { return make_tensor({cout, cin, 3, 3, 3}, true); }

TensorPtr zero_bias(int cout) { return make_tensor({cout}, true); }

TensorPtr conv_block(Tape& tape, const TensorPtr& x, const TensorPtr& w, const TensorPtr& b, int stride) {
  return leaky_relu(tape, conv3d(tape, x, w, b, stride), kLeakySlope);
}

}  // namespace

TrainMode train_mode_from_string(const std::string& s) {
  if (s == "REG" || s == "reg") return TrainMode::kReg;
  if (s == "MTL" || s == "mtl") return TrainMode::kMtl;
  if (s == "FEAT" || s == "feat") return TrainMode::kFeat;
  throw std::invalid_argument("unknown training mode: " + s);
}

std::string to_string(TrainMode m) {
  switch (m) {
    case TrainMode::kReg: return "REG";
    case TrainMode::kMtl: return "MTL";
    case TrainMode::kFeat: return "FEAT";
  }
  return "REG";
}

void TrainConfig::validate() const {
  if (lambda < 0.0 || beta < 0.0) throw std::invalid_argument("train: lambda and beta must be >= 0");
  if (learning_rate <= 0.0) throw std::invalid_argument("train: learning_rate must be positive");
  if (nlcc_window < 3 || nlcc_window % 2 == 0) throw std::invalid_argument("train: nlcc_window must be odd and >= 3");
  if (epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");
}

std::vector<std::pair<std::string, TensorPtr>> NetworkParameters::named_tensors() const {
  std::vector<std::pair<std::string, TensorPtr>> out;
  for (int l = 0; l < 4; ++l) {
    out.emplace_back("enc" + std::to_string(l + 1) + ".w", enc_w[l]);
    out.emplace_back("enc" + std::to_string(l + 1) + ".b", enc_b[l]);
  }
  out.emplace_back("mid1.w", mid1_w);
  out.emplace_back("mid1.b", mid1_b);
  out.emplace_back("mid2.w", mid2_w);
  out.emplace_back("mid2.b", mid2_b);
  for (int l = 0; l < 4; ++l) {
    out.emplace_back("dec" + std::to_string(l + 1) + ".w", dec_w[l]);
    out.emplace_back("dec" + std::to_string(l + 1) + ".b", dec_b[l]);
  }
  out.emplace_back("pen.w", pen_w);
  out.emplace_back("pen.b", pen_b);
  out.emplace_back("head.w", head_w);
  out.emplace_back("head.b", head_b);
  if (has_seg_head()) {
    out.emplace_back("seg.w", seg_w);
    out.emplace_back("seg.b", seg_b);
  }
  return out;
}

std::vector<TensorPtr> NetworkParameters::tensors() const {
  std::vector<TensorPtr> out;
  for (auto& [name, t] : named_tensors()) out.push_back(t);
  return out;
}

NetworkParameters make_network_parameters(std::uint64_t seed, int seg_classes) {
  RandomStream rng(seed);
  NetworkParameters p;
  int cin = 2;  // moving and fixed image channels
  for (int l = 0; l < 4; ++l) {
    p.enc_w.push_back(init_kernel(kEncChannels[l], cin, rng));
    p.enc_b.push_back(zero_bias(kEncChannels[l]));
    cin = kEncChannels[l];
  }
  p.mid1_w = init_kernel(32, 32, rng);
  p.mid1_b = zero_bias(32);
  p.mid2_w = init_kernel(32, 32, rng);
  p.mid2_b = zero_bias(32);

  // Skip sources, deepest first: enc3 out, enc2 out, enc1 out, network input.
  const int skip_channels[4] = {kEncChannels[2], kEncChannels[1], kEncChannels[0], 2};
  cin = 32;
  for (int l = 0; l < 4; ++l) {
    p.dec_w.push_back(init_kernel(kDecChannels[l], cin + skip_channels[l], rng));
    p.dec_b.push_back(zero_bias(kDecChannels[l]));
    cin = kDecChannels[l];
  }
  p.pen_w = init_kernel(kFeatChannels, kDecChannels[3], rng);
  p.pen_b = zero_bias(kFeatChannels);
  p.head_w = zero_kernel(3, kFeatChannels);
  p.head_b = zero_bias(3);

  if (seg_classes > 0) {
    p.seg_classes = seg_classes;
    p.seg_w = init_kernel(seg_classes, kFeatChannels + seg_classes, rng);
    p.seg_b = zero_bias(seg_classes);
  }
  return p;
}

NetworkOutput forward_network(Tape& tape, const NetworkParameters& params, const Volume& moving,
                              const Volume& fixed) {
  require_same_dims(moving.dims, fixed.dims, "forward_network");
  for (int a = 0; a < 3; ++a) {
    if (moving.dims[a] % 16 != 0) {
      throw std::invalid_argument("forward_network: dims must be divisible by 16");
    }
  }

  std::vector<double> joint(moving.data.size() * 2);
  std::copy(moving.data.begin(), moving.data.end(), joint.begin());
  std::copy(fixed.data.begin(), fixed.data.end(), joint.begin() + moving.data.size());
  TensorPtr input = make_leaf({2, moving.dims[0], moving.dims[1], moving.dims[2]}, std::move(joint));

  TensorPtr e1 = conv_block(tape, input, params.enc_w[0], params.enc_b[0], 2);
  TensorPtr e2 = conv_block(tape, e1, params.enc_w[1], params.enc_b[1], 2);
  TensorPtr e3 = conv_block(tape, e2, params.enc_w[2], params.enc_b[2], 2);
  TensorPtr e4 = conv_block(tape, e3, params.enc_w[3], params.enc_b[3], 2);

  TensorPtr mid = conv_block(tape, e4, params.mid1_w, params.mid1_b, 1);
  mid = conv_block(tape, mid, params.mid2_w, params.mid2_b, 1);

  const TensorPtr skips[4] = {e3, e2, e1, input};
  TensorPtr d = mid;
  for (int l = 0; l < 4; ++l) {
    d = upsample2x(tape, d);
    d = concat_channels(tape, d, skips[l]);
    d = conv_block(tape, d, params.dec_w[l], params.dec_b[l], 1);
  }

  NetworkOutput out;
  out.feat = conv_block(tape, d, params.pen_w, params.pen_b, 1);
  out.field = conv3d(tape, out.feat, params.head_w, params.head_b, 1);
  return out;
}

TensorPtr residual_seg_head(Tape& tape, const NetworkParameters& params, const TensorPtr& feat,
                            const TensorPtr& s0) {
  if (!params.has_seg_head()) {
    throw std::invalid_argument("residual_seg_head: parameters carry no segmentation head");
  }
  if (s0->shape[0] != params.seg_classes) {
    throw std::invalid_argument("residual_seg_head: class count mismatch");
  }
  TensorPtr joint = concat_channels(tape, feat, s0);
  TensorPtr logits = conv3d(tape, joint, params.seg_w, params.seg_b, 1);
  return softmax_channels(tape, logits);
}

DisplacementField predict_field(const NetworkParameters& params, const Volume& moving, const Volume& fixed) {
  Tape tape;
  NetworkOutput out = forward_network(tape, params, moving, fixed);
  return field_from_tensor(*out.field);
}

}  // namespace voxreg
