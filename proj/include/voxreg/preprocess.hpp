// Intensity and grid preprocessing applied before simulation or training.
#pragma once

#include "voxreg/types.hpp"

namespace voxreg {

// Clips to mean +/- 6 sigma (population sigma over the whole volume), then
// affinely maps the clipped range to [0, 1]. Throws on constant volumes.
Volume normalize(const Volume& v);

// Trilinear resampling onto an isotropic-or-not target spacing. Output dims
// are round(dims * spacing / target); throws if any output dim collapses to 0.
Volume resample_to_spacing(const Volume& v, const Spacing& target_spacing);

// value(p, c) = 1 if label(p) == c else 0.
ProbabilityMap one_hot(const LabelMap& s);

// Per-voxel argmax over classes, ties resolved to the smallest class index.
LabelMap argmax_labels(const ProbabilityMap& p);

}  // namespace voxreg
