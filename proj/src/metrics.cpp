#include "voxreg/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace voxreg {

double epe(const DisplacementField& f, const DisplacementField& f_g, const Spacing& spacing) {
  require_same_dims(f.dims, f_g.dims, "epe");
  const std::int64_t n = f.size();
  double total = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double d0 = (f.vectors[i] - f_g.vectors[i]) * spacing[0];
    const double d1 = (f.vectors[n + i] - f_g.vectors[n + i]) * spacing[1];
    const double d2 = (f.vectors[2 * n + i] - f_g.vectors[2 * n + i]) * spacing[2];
    total += std::sqrt(d0 * d0 + d1 * d1 + d2 * d2);
  }
  return total / static_cast<double>(n);
}

double mse(const Volume& a, const Volume& b) {
  require_same_dims(a.dims, b.dims, "mse");
  const std::int64_t n = a.size();
  double total = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double d = a.data[i] - b.data[i];
    total += d * d;
  }
  return total / static_cast<double>(n);
}

double nlcc(const Volume& a, const Volume& b, int window) {
  require_same_dims(a.dims, b.dims, "nlcc");
  if (window < 3 || window % 2 == 0) throw std::invalid_argument("nlcc: window must be odd and >= 3");
  if (window > a.dims[0] || window > a.dims[1] || window > a.dims[2]) {
    throw std::invalid_argument("nlcc: window larger than volume");
  }
  constexpr double kEps = 1e-5;
  const int h = window / 2;
  const double wn = static_cast<double>(window) * window * window;

  double total = 0.0;
  std::int64_t count = 0;
  for (int i = h; i < a.dims[0] - h; ++i) {
    for (int j = h; j < a.dims[1] - h; ++j) {
      for (int k = h; k < a.dims[2] - h; ++k) {
        double sa = 0.0, sb = 0.0;
        for (int di = -h; di <= h; ++di) {
          for (int dj = -h; dj <= h; ++dj) {
            const double* row_a = a.data.data() + linear_index(a.dims, i + di, j + dj, k - h);
            const double* row_b = b.data.data() + linear_index(a.dims, i + di, j + dj, k - h);
            for (int dk = 0; dk < window; ++dk) {
              sa += row_a[dk];
              sb += row_b[dk];
            }
          }
        }
        const double ma = sa / wn;
        const double mb = sb / wn;
        double cross = 0.0, var_a = 0.0, var_b = 0.0;
        for (int di = -h; di <= h; ++di) {
          for (int dj = -h; dj <= h; ++dj) {
            const double* row_a = a.data.data() + linear_index(a.dims, i + di, j + dj, k - h);
            const double* row_b = b.data.data() + linear_index(a.dims, i + di, j + dj, k - h);
            for (int dk = 0; dk < window; ++dk) {
              const double da = row_a[dk] - ma;
              const double db = row_b[dk] - mb;
              cross += da * db;
              var_a += da * da;
              var_b += db * db;
            }
          }
        }
        total += (cross * cross) / (var_a * var_b + kEps);
        ++count;
      }
    }
  }
  return total / static_cast<double>(count);
}

double mutual_information(const Volume& a, const Volume& b, int bins) {
  require_same_dims(a.dims, b.dims, "mutual_information");
  if (bins < 2) throw std::invalid_argument("mutual_information: bins must be >= 2");
  const std::int64_t n = a.size();
  for (std::int64_t i = 0; i < n; ++i) {
    if (a.data[i] < 0.0 || a.data[i] > 1.0 || b.data[i] < 0.0 || b.data[i] > 1.0) {
      throw std::invalid_argument("mutual_information: inputs must be normalized to [0, 1]");
    }
  }

  std::vector<double> joint(static_cast<std::size_t>(bins) * bins, 0.0);
  auto bin_of = [bins](double v) { return std::min(static_cast<int>(v * bins), bins - 1); };
  for (std::int64_t i = 0; i < n; ++i) {
    joint[static_cast<std::size_t>(bin_of(a.data[i])) * bins + bin_of(b.data[i])] += 1.0;
  }
  for (double& c : joint) c /= static_cast<double>(n);

  std::vector<double> pa(bins, 0.0), pb(bins, 0.0);
  for (int x = 0; x < bins; ++x) {
    for (int y = 0; y < bins; ++y) {
      pa[x] += joint[static_cast<std::size_t>(x) * bins + y];
      pb[y] += joint[static_cast<std::size_t>(x) * bins + y];
    }
  }

  double mi = 0.0;
  for (int x = 0; x < bins; ++x) {
    for (int y = 0; y < bins; ++y) {
      const double pxy = joint[static_cast<std::size_t>(x) * bins + y];
      if (pxy > 0.0) mi += pxy * std::log(pxy / (pa[x] * pb[y]));
    }
  }
  return mi;
}

double dice(const LabelMap& pred, const LabelMap& truth, int class_id) {
  require_same_dims(pred.dims, truth.dims, "dice");
  const std::int64_t n = pred.size();
  std::int64_t inter = 0, np = 0, nt = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    const bool p = pred.labels[i] == class_id;
    const bool t = truth.labels[i] == class_id;
    inter += (p && t) ? 1 : 0;
    np += p ? 1 : 0;
    nt += t ? 1 : 0;
  }
  if (np + nt == 0) return 1.0;  // class absent from both maps
  return 2.0 * static_cast<double>(inter) / static_cast<double>(np + nt);
}

LabelMap majority_vote(const std::vector<LabelMap>& votes) {
  if (votes.empty()) throw std::invalid_argument("majority_vote: empty vote list");
  const Dims dims = votes[0].dims;
  int classes = 0;
  for (const auto& v : votes) {
    require_same_dims(v.dims, dims, "majority_vote");
    classes = std::max(classes, v.num_classes);
  }
  LabelMap out(dims, classes);
  const std::int64_t n = out.size();
  std::vector<int> counts(classes);
  for (std::int64_t i = 0; i < n; ++i) {
    std::fill(counts.begin(), counts.end(), 0);
    for (const auto& v : votes) ++counts[v.labels[i]];
    int best = 0;
    for (int c = 1; c < classes; ++c) {
      if (counts[c] > counts[best]) best = c;  // ties keep the smaller index
    }
    out.labels[i] = best;
  }
  return out;
}

Volume uncertainty_map(const std::vector<LabelMap>& votes, const LabelMap& consensus) {
  if (votes.empty()) throw std::invalid_argument("uncertainty_map: empty vote list");
  for (const auto& v : votes) require_same_dims(v.dims, consensus.dims, "uncertainty_map");
  Volume out(consensus.dims, {1.0, 1.0, 1.0});
  const std::int64_t n = out.size();
  const double inv = 1.0 / static_cast<double>(votes.size());
  for (std::int64_t i = 0; i < n; ++i) {
    int agree = 0;
    for (const auto& v : votes) agree += (v.labels[i] == consensus.labels[i]) ? 1 : 0;
    out.data[i] = 1.0 - agree * inv;
  }
  return out;
}

}  // namespace voxreg
