// Registration simulator: samples random affine + elastic transformations and
// emits ground-truth displacement fields, warped fixed images and warped
// labels for training and evaluation.
#pragma once

#include <optional>
#include <vector>

#include "voxreg/rng.hpp"
#include "voxreg/types.hpp"

namespace voxreg {

struct SimulatorConfig {
  std::array<double, 3> rot_max{M_PI / 6.0, M_PI / 6.0, M_PI / 6.0};  // radians per axis
  std::array<double, 3> scale_min{0.75, 0.75, 0.75};
  std::array<double, 3> scale_max{1.25, 1.25, 1.25};
  std::array<double, 3> trans_max{0.02, 0.02, 0.02};  // fraction of axis length
  double elastic_gamma_max = 1000.0;                  // std of raw voxel offsets
  double smooth_sigma_min = 10.0;                     // Gaussian filter std, voxels
  double smooth_sigma_max = 13.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SampledTransform {
  std::array<double, 3> angles{};       // ~ U(0, rot_max)
  std::array<double, 3> scales{};       // ~ U(scale_min, scale_max)
  std::array<double, 3> translation{};  // ~ U(-trans_max, trans_max)
  double elastic_gamma = 0.0;           // ~ U(0, elastic_gamma_max)
  double smooth_sigma = 0.0;            // ~ U(smooth_sigma_min, smooth_sigma_max)
};

SampledTransform sample_transform(const SimulatorConfig& cfg, RandomStream& rng);

// Affine displacement about the grid centre:
//   F(p) = R*S*(p - ctr) + ctr + l.*dims - p,  ctr = (dims - 1) / 2,
// with S = diag(scales) and R = R0(a0)*R1(a1)*R2(a2) (rotation about axis 0
// applied last). Matches the backward-warping convention of the resampler.
DisplacementField build_affine_field(const SampledTransform& t, const Dims& dims);

// Unit-sum truncated Gaussian taps for offsets -radius .. radius,
// radius = ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

// In-place separable Gaussian smoothing over all three axes of a scalar grid
// in the toolkit layout, edge-replicate boundary.
void gaussian_smooth(std::vector<double>& data, const Dims& dims, double sigma);

// I.i.d. N(0, gamma^2) per-voxel per-axis offsets, separably smoothed with a
// truncated Gaussian of std sigma (edge-replicate boundary).
DisplacementField build_elastic_field(const SampledTransform& t, const Dims& dims, RandomStream& rng);

struct GeneratedPair {
  SampledTransform transform;
  DisplacementField field;        // affine + elastic, componentwise sum
  Volume fixed;                   // warp_linear(moving, field)
  std::optional<LabelMap> labels; // warp_nearest(moving labels, field)
};

GeneratedPair generate_pair(const Volume& moving, const LabelMap* moving_labels,
                            const SimulatorConfig& cfg, RandomStream& rng);

}  // namespace voxreg
