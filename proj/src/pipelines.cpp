#include "voxreg/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "voxreg/adam.hpp"
#include "voxreg/preprocess.hpp"

namespace voxreg {

namespace {

int padded_dim(int d, int multiple) { return ((d + multiple - 1) / multiple) * multiple; }

bool needs_padding(const Dims& dims, int multiple) {
  return dims[0] % multiple != 0 || dims[1] % multiple != 0 || dims[2] % multiple != 0;
}

DisplacementField crop_field(const DisplacementField& f, const Dims& dims) {
  DisplacementField out(dims);
  const std::int64_t n = out.size();
  const std::int64_t np = f.size();
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < dims[0]; ++i) {
      for (int j = 0; j < dims[1]; ++j) {
        for (int k = 0; k < dims[2]; ++k) {
          out.vectors[c * n + linear_index(dims, i, j, k)] =
              f.vectors[c * np + linear_index(f.dims, i, j, k)];
        }
      }
    }
  }
  return out;
}

struct PaddedForward {
  DisplacementField field;  // cropped to the original dims
  TensorPtr feat;           // cropped {16, D, H, W}
};

TensorPtr crop_tensor(const TensorPtr& t, const Dims& dims) {
  const Dims src{t->shape[1], t->shape[2], t->shape[3]};
  if (src == dims) return t;
  const int C = t->shape[0];
  TensorPtr out = make_tensor({C, dims[0], dims[1], dims[2]});
  const std::int64_t n = voxel_count(dims);
  const std::int64_t np = voxel_count(src);
  for (int c = 0; c < C; ++c) {
    for (int i = 0; i < dims[0]; ++i) {
      for (int j = 0; j < dims[1]; ++j) {
        for (int k = 0; k < dims[2]; ++k) {
          out->value[c * n + linear_index(dims, i, j, k)] =
              t->value[c * np + linear_index(src, i, j, k)];
        }
      }
    }
  }
  return out;
}

PaddedForward forward_padded(const NetworkParameters& params, const Volume& moving, const Volume& fixed) {
  require_same_dims(moving.dims, fixed.dims, "register");
  const Volume m = pad_to_multiple(moving, 16);
  const Volume f = pad_to_multiple(fixed, 16);
  Tape tape;
  NetworkOutput out = forward_network(tape, params, m, f);
  PaddedForward r;
  r.field = crop_field(field_from_tensor(*out.field), moving.dims);
  r.feat = crop_tensor(out.feat, moving.dims);
  return r;
}

struct PreparedSample {
  Volume moving;
  std::optional<LabelMap> labels;
  std::optional<Volume> fixed_real;
  std::optional<LabelMap> fixed_real_labels;
};

}  // namespace

Volume pad_to_multiple(const Volume& v, int multiple) {
  if (!needs_padding(v.dims, multiple)) return v;
  const Dims nd{padded_dim(v.dims[0], multiple), padded_dim(v.dims[1], multiple),
                padded_dim(v.dims[2], multiple)};
  Volume out(nd, v.spacing);
  for (int i = 0; i < nd[0]; ++i) {
    const int si = std::min(i, v.dims[0] - 1);
    for (int j = 0; j < nd[1]; ++j) {
      const int sj = std::min(j, v.dims[1] - 1);
      for (int k = 0; k < nd[2]; ++k) {
        out.at(i, j, k) = v.at(si, sj, std::min(k, v.dims[2] - 1));
      }
    }
  }
  return out;
}

LabelMap pad_to_multiple(const LabelMap& s, int multiple) {
  if (!needs_padding(s.dims, multiple)) return s;
  const Dims nd{padded_dim(s.dims[0], multiple), padded_dim(s.dims[1], multiple),
                padded_dim(s.dims[2], multiple)};
  LabelMap out(nd, s.num_classes);
  for (int i = 0; i < nd[0]; ++i) {
    const int si = std::min(i, s.dims[0] - 1);
    for (int j = 0; j < nd[1]; ++j) {
      const int sj = std::min(j, s.dims[1] - 1);
      for (int k = 0; k < nd[2]; ++k) {
        out.at(i, j, k) = s.at(si, sj, std::min(k, s.dims[2] - 1));
      }
    }
  }
  return out;
}

TrainResult train(const std::vector<TrainSample>& dataset, const SimulatorConfig& sim_cfg,
                  const TrainConfig& cfg) {
  cfg.validate();
  sim_cfg.validate();
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");

  const bool needs_labels = cfg.mode != TrainMode::kReg;
  std::vector<PreparedSample> samples;
  samples.reserve(dataset.size());
  int num_classes = 0;
  for (const auto& s : dataset) {
    if (needs_labels && !s.moving_labels.has_value()) {
      throw std::invalid_argument("train: " + to_string(cfg.mode) + " mode requires moving labels");
    }
    PreparedSample p;
    p.moving = pad_to_multiple(s.moving, 16);
    if (s.moving_labels) {
      require_same_dims(s.moving.dims, s.moving_labels->dims, "train");
      p.labels = pad_to_multiple(*s.moving_labels, 16);
      num_classes = std::max(num_classes, p.labels->num_classes);
    }
    if (s.fixed_real) {
      p.fixed_real = pad_to_multiple(*s.fixed_real, 16);
      if (needs_labels) {
        if (!s.fixed_real_labels.has_value()) {
          throw std::invalid_argument("train: fixed_real partner requires fixed_real_labels");
        }
        p.fixed_real_labels = pad_to_multiple(*s.fixed_real_labels, 16);
      }
    }
    samples.push_back(std::move(p));
  }
  if (needs_labels && samples.size() < 2) {
    bool has_partner = samples[0].fixed_real.has_value();
    if (!has_partner) {
      throw std::invalid_argument("train: dual registration needs a second sample or fixed_real partners");
    }
  }

  TrainResult result;
  result.params = make_network_parameters(cfg.seed, cfg.mode == TrainMode::kFeat ? num_classes : 0);
  auto tensors = result.params.tensors();
  AdamState adam;
  RandomStream rng(sim_cfg.seed);

  int step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const PreparedSample& s = samples[i];
      ++step;

      const LabelMap* labels_ptr = (needs_labels && s.labels) ? &*s.labels : nullptr;
      GeneratedPair pair = generate_pair(s.moving, labels_ptr, sim_cfg, rng);

      Tape tape;
      NetworkOutput fwd = forward_network(tape, result.params, s.moving, pair.fixed);
      TensorPtr moving_t = tensor_from_volume(s.moving);
      TensorPtr recon0 = warp_channels(tape, moving_t, fwd.field);
      TensorPtr l_field = loss_field_epe(tape, fwd.field, tensor_from_field(pair.field));
      TensorPtr l_sim0 = loss_nlcc(tape, tensor_from_volume(pair.fixed), recon0, cfg.nlcc_window);

      LossRecord rec;
      rec.step = step;
      rec.field = l_field->value[0];
      rec.sim0 = l_sim0->value[0];

      TensorPtr total = add(tape, l_field, scale(tape, l_sim0, cfg.lambda));

      if (needs_labels) {
        // Dual-registration partner: explicit when provided, otherwise a
        // random other sample (with replacement across steps).
        const Volume* fixed1 = nullptr;
        const LabelMap* fixed1_labels = nullptr;
        if (s.fixed_real) {
          fixed1 = &*s.fixed_real;
          fixed1_labels = &*s.fixed_real_labels;
        } else {
          std::size_t j = static_cast<std::size_t>(rng.below(samples.size() - 1));
          if (j >= i) ++j;
          fixed1 = &samples[j].moving;
          fixed1_labels = &*samples[j].labels;
        }

        NetworkOutput fwd1 = forward_network(tape, result.params, s.moving, *fixed1);
        TensorPtr recon1 = warp_channels(tape, moving_t, fwd1.field);
        TensorPtr l_sim1 = loss_nlcc(tape, tensor_from_volume(*fixed1), recon1, cfg.nlcc_window);
        rec.sim1 = l_sim1->value[0];
        total = add(tape, total, scale(tape, l_sim1, cfg.lambda));

        TensorPtr onehot_m = tensor_from_probmap(one_hot(*s.labels));
        TensorPtr s0 = warp_channels(tape, onehot_m, fwd.field);
        TensorPtr s1 = warp_channels(tape, onehot_m, fwd1.field);
        TensorPtr sg0 = tensor_from_probmap(one_hot(*pair.labels));
        TensorPtr sg1 = tensor_from_probmap(one_hot(*fixed1_labels));

        TensorPtr l_seg;
        if (cfg.mode == TrainMode::kMtl) {
          l_seg = add(tape, loss_dice(tape, s0, sg0), loss_dice(tape, s1, sg1));
        } else {
          TensorPtr s_feat = residual_seg_head(tape, result.params, fwd.feat, s0);
          l_seg = add(tape, loss_dice(tape, s_feat, sg0), loss_dice(tape, s1, sg1));
          if (cfg.feat_keep_warped_term) {
            l_seg = add(tape, l_seg, loss_dice(tape, s0, sg0));
          }
        }
        rec.seg = l_seg->value[0];
        total = add(tape, total, scale(tape, l_seg, cfg.beta));
      }

      rec.total = total->value[0];
      result.history.push_back(rec);

      zero_grads(tensors);
      tape.backward(total);
      adam_step(tensors, adam, cfg);
      ++result.params.step_count;
    }
  }
  return result;
}

Registration register_pair(const NetworkParameters& params, const Volume& moving, const Volume& fixed) {
  PaddedForward fwd = forward_padded(params, moving, fixed);
  Registration reg;
  reg.field = std::move(fwd.field);
  reg.reconstruction = warp_linear(moving, reg.field);
  return reg;
}

LabelMap atlas_segment(const NetworkParameters& params, const Volume& atlas_image,
                       const LabelMap& atlas_labels, const Volume& target) {
  require_same_dims(atlas_image.dims, atlas_labels.dims, "atlas_segment");
  Registration reg = register_pair(params, atlas_image, target);
  return warp_nearest(atlas_labels, reg.field);
}

MultiAtlasResult multi_atlas_segment(const NetworkParameters& params, const AtlasSet& atlases,
                                     const Volume& target, int nlcc_window) {
  if (atlases.entries.empty()) throw std::invalid_argument("multi_atlas_segment: empty atlas set");
  if (atlases.selection_fraction <= 0.0 || atlases.selection_fraction > 1.0) {
    throw std::invalid_argument("multi_atlas_segment: selection_fraction must be in (0, 1]");
  }

  const int n = static_cast<int>(atlases.entries.size());
  std::vector<DisplacementField> fields;
  std::vector<double> scores;
  fields.reserve(n);
  scores.reserve(n);
  for (const auto& [image, labels] : atlases.entries) {
    require_same_dims(image.dims, labels.dims, "multi_atlas_segment");
    Registration reg = register_pair(params, image, target);
    scores.push_back(nlcc(reg.reconstruction, target, nlcc_window));
    fields.push_back(std::move(reg.field));
  }

  const int keep = static_cast<int>(std::ceil(atlases.selection_fraction * n));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] > scores[b]; });
  order.resize(keep);

  std::vector<LabelMap> votes;
  votes.reserve(keep);
  for (int idx : order) {
    votes.push_back(warp_nearest(atlases.entries[idx].second, fields[idx]));
  }

  MultiAtlasResult res;
  res.labels = majority_vote(votes);
  res.uncertainty = uncertainty_map(votes, res.labels);
  res.selected = std::move(order);
  return res;
}

LabelMap segment_mtl(const NetworkParameters& params, const Volume& moving,
                     const LabelMap& moving_labels, const Volume& target, TrainMode mode) {
  require_same_dims(moving.dims, moving_labels.dims, "segment_mtl");
  if (mode == TrainMode::kReg) throw std::invalid_argument("segment_mtl: mode must be MTL or FEAT");
  if (mode == TrainMode::kFeat && !params.has_seg_head()) {
    throw std::invalid_argument("segment_mtl: FEAT mode requires segmentation head parameters");
  }

  PaddedForward fwd = forward_padded(params, moving, target);
  ProbabilityMap warped = warp_probmap(one_hot(moving_labels), fwd.field);
  if (mode == TrainMode::kMtl) {
    return argmax_labels(warped);
  }

  Tape tape;
  TensorPtr s0 = tensor_from_probmap(warped);
  TensorPtr s_feat = residual_seg_head(tape, params, fwd.feat, s0);
  return argmax_labels(probmap_from_tensor(*s_feat));
}

Backprojection backproject_prediction(const DisplacementField& field, const LabelMap& prediction) {
  require_same_dims(field.dims, prediction.dims, "backproject_prediction");
  InvertResult inv = invert_field(field);
  Backprojection out;
  out.labels = warp_nearest(prediction, inv.field);
  out.inversion_residual = inv.mean_residual;
  return out;
}

std::vector<TrainSample> make_synthetic_dataset(int n, const Dims& dims, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("make_synthetic_dataset: n must be >= 1");
  check_dims(dims);
  RandomStream rng(seed);

  std::vector<TrainSample> out;
  out.reserve(n);
  for (int s = 0; s < n; ++s) {
    Volume vol(dims, {1.0, 1.0, 1.0});
    LabelMap labels(dims, 3);

    // Low-frequency cosine texture so local correlation is informative
    // everywhere.
    struct Wave {
      double k0, k1, k2, phase;
    };
    std::vector<Wave> waves(5);
    for (auto& w : waves) {
      w.k0 = rng.uniform(-0.5, 0.5);
      w.k1 = rng.uniform(-0.5, 0.5);
      w.k2 = rng.uniform(-0.5, 0.5);
      w.phase = rng.uniform(0.0, 2.0 * M_PI);
    }

    struct Blob {
      int cls;
      double c0, c1, c2, r0, r1, r2, intensity;
    };
    std::vector<Blob> blobs;
    for (int cls = 1; cls <= 2; ++cls) {
      // Classes occupy opposite halves along axis 0 so the per-class voxel
      // fractions stay within bounds.
      const double lo = cls == 1 ? 0.22 : 0.58;
      const double hi = cls == 1 ? 0.42 : 0.78;
      for (int b = 0; b < 2; ++b) {
        Blob blob;
        blob.cls = cls;
        blob.c0 = rng.uniform(lo, hi) * dims[0];
        blob.c1 = rng.uniform(0.25, 0.75) * dims[1];
        blob.c2 = rng.uniform(0.25, 0.75) * dims[2];
        blob.r0 = rng.uniform(0.15, 0.21) * dims[0];
        blob.r1 = rng.uniform(0.15, 0.21) * dims[1];
        blob.r2 = rng.uniform(0.15, 0.21) * dims[2];
        blob.intensity = cls == 1 ? rng.uniform(0.5, 0.6) : rng.uniform(0.8, 0.9);
        blobs.push_back(blob);
      }
    }

    std::int64_t idx = 0;
    for (int i = 0; i < dims[0]; ++i) {
      for (int j = 0; j < dims[1]; ++j) {
        for (int k = 0; k < dims[2]; ++k, ++idx) {
          double texture = 0.0;
          for (const auto& w : waves) {
            texture += std::cos(w.k0 * i + w.k1 * j + w.k2 * k + w.phase);
          }
          double value = 0.22 + 0.035 * texture;

          double best_strength = 0.0;
          int best_cls = 0;
          for (const auto& blob : blobs) {
            const double d0 = (i - blob.c0) / blob.r0;
            const double d1 = (j - blob.c1) / blob.r1;
            const double d2 = (k - blob.c2) / blob.r2;
            const double g = std::exp(-(d0 * d0 + d1 * d1 + d2 * d2));
            value = std::max(value, blob.intensity * g + 0.03 * texture);
            if (g > best_strength) {
              best_strength = g;
              best_cls = blob.cls;
            }
          }
          labels.labels[idx] = best_strength > 0.5 ? best_cls : 0;
          vol.data[idx] = value;
        }
      }
    }

    // Affine map to [0, 1].
    const auto [mn, mx] = std::minmax_element(vol.data.begin(), vol.data.end());
    const double lo = *mn, span = *mx - *mn;
    for (double& v : vol.data) v = (v - lo) / span;

    TrainSample sample;
    sample.moving = std::move(vol);
    sample.moving_labels = std::move(labels);
    out.push_back(std::move(sample));
  }
  return out;
}

}  // namespace voxreg
