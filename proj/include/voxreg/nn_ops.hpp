// Differentiable building blocks: 3^3 convolutions, LeakyReLU, trilinear
// upsampling, channel concatenation, softmax, backward warping, and the
// field / similarity / segmentation losses.
//
// Spatial tensors are shaped {C, D, H, W} with the toolkit voxel layout per
// channel; displacement-field tensors are {3, D, H, W}.
#pragma once

#include "voxreg/tensor.hpp"
#include "voxreg/types.hpp"

namespace voxreg {

// 3x3x3 convolution, zero padding 1, stride 1 or 2.
// x: {Cin, D, H, W}, w: {Cout, Cin, 3, 3, 3}, b: {Cout}.
TensorPtr conv3d(Tape& tape, const TensorPtr& x, const TensorPtr& w, const TensorPtr& b, int stride);

TensorPtr leaky_relu(Tape& tape, const TensorPtr& x, double slope);

// Trilinear 2x upsampling; output coordinate o samples input at o/2 - 0.25.
TensorPtr upsample2x(Tape& tape, const TensorPtr& x);

TensorPtr concat_channels(Tape& tape, const TensorPtr& a, const TensorPtr& b);

// Numerically stable softmax over the channel axis, per voxel.
TensorPtr softmax_channels(Tape& tape, const TensorPtr& x);

// Backward warp of every channel of `image` by `field` (same semantics as
// resampler::warp_linear). Differentiable with respect to both the image and
// the field; clamped sample coordinates contribute zero field gradient.
TensorPtr warp_channels(Tape& tape, const TensorPtr& image, const TensorPtr& field);

// Mean per-voxel L2 norm of (f - f_ref): the endpoint-error field loss.
// Subgradient 0 where the per-voxel difference vanishes.
TensorPtr loss_field_epe(Tape& tape, const TensorPtr& f, const TensorPtr& f_ref);

// Negated windowed squared normalized local cross-correlation between a fixed
// single-channel image and a reconstruction; gradient flows into the
// reconstruction. Matches metrics::nlcc (negated), including the 1e-5
// denominator stabilizer.
TensorPtr loss_nlcc(Tape& tape, const TensorPtr& fixed, const TensorPtr& recon, int window);

// Soft Dice overlap loss -(1/C) sum_c (2 sum pq + s) / (sum (p + q) + s) with
// smoothing s = 1e-5; pred and truth are {C, D, H, W}.
TensorPtr loss_dice(Tape& tape, const TensorPtr& pred, const TensorPtr& truth);

TensorPtr add(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr scale(Tape& tape, const TensorPtr& a, double k);

// Scalar linear functional sum_i coeffs[i] * x[i].
TensorPtr weighted_sum(Tape& tape, const TensorPtr& x, const std::vector<double>& coeffs);

// Field-supervision loss plus lambda-weighted similarity loss.
TensorPtr loss_hybrid(Tape& tape, const TensorPtr& f, const TensorPtr& f_ref, const TensorPtr& i_fixed,
                      const TensorPtr& i_recon, double lambda, int window);

// Multi-task composition: field supervision, both similarity terms, and the
// beta-weighted overlap terms of the dual-registration branches.
TensorPtr loss_mtl(Tape& tape, const TensorPtr& f0, const TensorPtr& fg0, const TensorPtr& i0,
                   const TensorPtr& ir0, const TensorPtr& i1, const TensorPtr& ir1, const TensorPtr& s0,
                   const TensorPtr& sg0, const TensorPtr& s1, const TensorPtr& sg1, double lambda,
                   double beta, int window);

// Leaf conversions between grid types and graph tensors.
TensorPtr tensor_from_volume(const Volume& v, bool requires_grad = false);
TensorPtr tensor_from_field(const DisplacementField& f, bool requires_grad = false);
TensorPtr tensor_from_probmap(const ProbabilityMap& p, bool requires_grad = false);
DisplacementField field_from_tensor(const Tensor& t);
ProbabilityMap probmap_from_tensor(const Tensor& t);

}  // namespace voxreg
