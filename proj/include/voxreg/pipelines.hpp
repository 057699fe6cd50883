// Orchestration: training in REG / MTL / FEAT modes, inference registration,
// atlas and multi-atlas segmentation with uncertainty, interpretability
// back-projection, and the synthetic desk-scale dataset generator.
#pragma once

#include <optional>
#include <vector>

#include "voxreg/metrics.hpp"
#include "voxreg/network.hpp"
#include "voxreg/resampler.hpp"
#include "voxreg/simulator.hpp"
#include "voxreg/types.hpp"

namespace voxreg {

struct TrainSample {
  Volume moving;
  std::optional<LabelMap> moving_labels;
  // Optional explicit dual-registration partner; when absent, MTL/FEAT draw a
  // random other sample from the dataset each step.
  std::optional<Volume> fixed_real;
  std::optional<LabelMap> fixed_real_labels;
};

struct AtlasSet {
  std::vector<std::pair<Volume, LabelMap>> entries;
  double selection_fraction = 0.1;
};

struct LossRecord {
  int step = 0;
  double field = 0.0;  // endpoint-error component
  double sim0 = 0.0;   // similarity vs the simulated fixed image
  double sim1 = 0.0;   // similarity vs the dataset fixed image (MTL/FEAT)
  double seg = 0.0;    // summed overlap terms (MTL/FEAT)
  double total = 0.0;
};

struct TrainResult {
  NetworkParameters params;
  std::vector<LossRecord> history;
};

// One optimizer step per sample per epoch, batch size 1; simulated pairs are
// drawn on the fly from the moving image.
TrainResult train(const std::vector<TrainSample>& dataset, const SimulatorConfig& sim_cfg,
                  const TrainConfig& cfg);

struct Registration {
  DisplacementField field;
  Volume reconstruction;
};

// Pads inputs (edge replicate) to the next multiple of 16 when needed and
// crops the predicted field back to the original grid.
Registration register_pair(const NetworkParameters& params, const Volume& moving, const Volume& fixed);

LabelMap atlas_segment(const NetworkParameters& params, const Volume& atlas_image,
                       const LabelMap& atlas_labels, const Volume& target);

struct MultiAtlasResult {
  LabelMap labels;
  Volume uncertainty;
  std::vector<int> selected;  // indices of the atlases kept after NLCC ranking
};

// Registers every atlas to the target, ranks by NLCC of the reconstruction,
// keeps the top ceil(selection_fraction * N), and majority-votes the warped
// labels (ties toward the smallest class index).
MultiAtlasResult multi_atlas_segment(const NetworkParameters& params, const AtlasSet& atlases,
                                     const Volume& target, int nlcc_window = 5);

// MTL: argmax of the warped one-hot atlas labels. FEAT: argmax of the
// residual segmentation head output (requires head parameters).
LabelMap segment_mtl(const NetworkParameters& params, const Volume& moving,
                     const LabelMap& moving_labels, const Volume& target, TrainMode mode);

struct Backprojection {
  LabelMap labels;
  double inversion_residual = 0.0;
};

// Warps a target-space prediction into moving-image space through the
// approximately inverted field.
Backprojection backproject_prediction(const DisplacementField& field, const LabelMap& prediction);

// Smooth random multi-blob volumes in [0, 1] with a 3-class label map
// (background + 2 blob classes); deterministic per seed.
std::vector<TrainSample> make_synthetic_dataset(int n, const Dims& dims, std::uint64_t seed);

// Edge-replicate padding of the high side of each axis up to a multiple;
// returns the input unchanged when already aligned.
Volume pad_to_multiple(const Volume& v, int multiple);
LabelMap pad_to_multiple(const LabelMap& s, int multiple);

}  // namespace voxreg
