// Backward warping of volumes, labels and probability maps by displacement
// fields, field composition, and approximate fixed-point field inversion.
//
// Backward-warping convention: output(p) samples the input at p + f(p).
// Sampling coordinates are clamped to [0, dim-1] per axis (edge replicate).
#pragma once

#include "voxreg/types.hpp"

namespace voxreg {

// Trilinear sample of a scalar grid at (x0, x1, x2), coordinates clamped to
// the grid. `data` uses the toolkit linear layout for `dims`.
double trilinear_sample(const double* data, const Dims& dims, double x0, double x1, double x2);

Volume warp_linear(const Volume& v, const DisplacementField& f);

// Nearest-neighbour warp; sample coordinate is rounded half away from zero,
// then clamped into the grid.
LabelMap warp_nearest(const LabelMap& s, const DisplacementField& f);

// Each class plane warped with warp_linear semantics.
ProbabilityMap warp_probmap(const ProbabilityMap& s, const DisplacementField& f);

// (f o g)(p) = g(p) + sample(f, p + g(p)): warping by the composite equals
// warping by f then by g.
DisplacementField compose_fields(const DisplacementField& f, const DisplacementField& g);

struct InvertResult {
  DisplacementField field;
  double mean_residual = 0.0;  // mean over voxels of |g(p) + sample(f, p + g(p))|
  int iterations = 0;
};

// Fixed-point iteration g_{k+1}(p) = -sample(f, p + g_k(p)) starting from
// g_0 = 0; stops when the mean per-voxel update drops below tol or after
// max_iters. Non-convergence is reported through the residual, not an error.
InvertResult invert_field(const DisplacementField& f, int max_iters = 50, double tol = 1e-3);

}  // namespace voxreg
