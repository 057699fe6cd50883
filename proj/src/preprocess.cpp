#include "voxreg/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "voxreg/resampler.hpp"

namespace voxreg {

Volume normalize(const Volume& v) {
  const std::int64_t n = v.size();
  double mean = 0.0;
  for (double x : v.data) mean += x;
  mean /= static_cast<double>(n);

  double var = 0.0;
  for (double x : v.data) {
    const double d = x - mean;
    var += d * d;
  }
  var /= static_cast<double>(n);
  const double sigma = std::sqrt(var);
  if (sigma == 0.0) {
    throw std::invalid_argument("normalize: degenerate intensity range");
  }

  const double lo = mean - 6.0 * sigma;
  const double hi = mean + 6.0 * sigma;

  Volume out(v.dims, v.spacing);
  double cmin = hi, cmax = lo;
  for (std::int64_t i = 0; i < n; ++i) {
    const double c = std::clamp(v.data[i], lo, hi);
    out.data[i] = c;
    cmin = std::min(cmin, c);
    cmax = std::max(cmax, c);
  }
  if (cmax == cmin) {
    throw std::invalid_argument("normalize: degenerate intensity range");
  }
  const double scale = 1.0 / (cmax - cmin);
  for (double& x : out.data) x = (x - cmin) * scale;
  return out;
}

Volume resample_to_spacing(const Volume& v, const Spacing& target_spacing) {
  for (double sp : target_spacing) {
    if (sp <= 0.0) throw std::invalid_argument("resample_to_spacing: target spacing must be positive");
  }
  Dims out_dims;
  for (int a = 0; a < 3; ++a) {
    out_dims[a] = static_cast<int>(std::lround(v.dims[a] * v.spacing[a] / target_spacing[a]));
    if (out_dims[a] <= 0) {
      throw std::invalid_argument("resample_to_spacing: output dimension collapses to zero");
    }
  }

  Volume out(out_dims, target_spacing);
  std::int64_t idx = 0;
  for (int i = 0; i < out_dims[0]; ++i) {
    const double x0 = i * target_spacing[0] / v.spacing[0];
    for (int j = 0; j < out_dims[1]; ++j) {
      const double x1 = j * target_spacing[1] / v.spacing[1];
      for (int k = 0; k < out_dims[2]; ++k, ++idx) {
        const double x2 = k * target_spacing[2] / v.spacing[2];
        out.data[idx] = trilinear_sample(v.data.data(), v.dims, x0, x1, x2);
      }
    }
  }
  return out;
}

ProbabilityMap one_hot(const LabelMap& s) {
  const std::int64_t n = s.size();
  ProbabilityMap out(s.dims, s.num_classes);
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int32_t c = s.labels[i];
    if (c < 0 || c >= s.num_classes) {
      throw std::invalid_argument("one_hot: label out of range");
    }
    out.at(c, i) = 1.0;
  }
  return out;
}

LabelMap argmax_labels(const ProbabilityMap& p) {
  const std::int64_t n = p.size();
  LabelMap out(p.dims, p.num_classes);
  for (std::int64_t i = 0; i < n; ++i) {
    int best = 0;
    double best_val = p.at(0, i);
    for (int c = 1; c < p.num_classes; ++c) {
      const double val = p.at(c, i);
      if (val > best_val) {
        best_val = val;
        best = c;
      }
    }
    out.labels[i] = best;
  }
  return out;
}

}  // namespace voxreg
