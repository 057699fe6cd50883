// Evaluation metrics outside the autodiff graph: endpoint error, MSE, windowed
// squared normalized local cross-correlation, mutual information, Dice, and
// the multi-atlas disagreement (uncertainty) map.
#pragma once

#include <vector>

#include "voxreg/types.hpp"

namespace voxreg {

struct MetricReport {
  double epe_mm = 0.0;
  double mse = 0.0;
  double nlcc = 0.0;
  double mi = 0.0;
  std::vector<double> dice_per_class;
  double wall_time_s = 0.0;
};

// Mean L2 endpoint error between two fields, converted from voxel units to
// millimetres via the spacing (identical at isotropic 1 mm).
double epe(const DisplacementField& f, const DisplacementField& f_g, const Spacing& spacing);

double mse(const Volume& a, const Volume& b);

// Mean over voxels with a fully in-bounds window of the squared local
// correlation (sign-blind); denominator stabilized with eps = 1e-5.
// The similarity loss is the negation of this value.
double nlcc(const Volume& a, const Volume& b, int window);

// Joint histogram on [0,1]^2 with bins x bins equal-width cells (1.0 falls in
// the last bin); natural-log mutual information in nats. Inputs must be
// normalized to [0, 1].
double mutual_information(const Volume& a, const Volume& b, int bins);

// 2|pred ∩ truth| / (|pred| + |truth|) for one class; defined as 1.0 when the
// class is absent from both maps.
double dice(const LabelMap& pred, const LabelMap& truth, int class_id);

// Per-voxel majority vote; ties resolve to the smallest class index.
LabelMap majority_vote(const std::vector<LabelMap>& votes);

// U(p) = 1 - (#votes agreeing with the consensus at p) / N.
Volume uncertainty_map(const std::vector<LabelMap>& votes, const LabelMap& consensus);

}  // namespace voxreg
