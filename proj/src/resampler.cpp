#include "voxreg/resampler.hpp"

#include <algorithm>
#include <cmath>

namespace voxreg {

namespace {

inline int clamp_index(int i, int dim) { return std::clamp(i, 0, dim - 1); }

}  // namespace

double trilinear_sample(const double* data, const Dims& dims, double x0, double x1, double x2) {
  const double c0 = std::clamp(x0, 0.0, static_cast<double>(dims[0] - 1));
  const double c1 = std::clamp(x1, 0.0, static_cast<double>(dims[1] - 1));
  const double c2 = std::clamp(x2, 0.0, static_cast<double>(dims[2] - 1));

  const int i0 = static_cast<int>(std::floor(c0));
  const int j0 = static_cast<int>(std::floor(c1));
  const int k0 = static_cast<int>(std::floor(c2));
  const int i1 = clamp_index(i0 + 1, dims[0]);
  const int j1 = clamp_index(j0 + 1, dims[1]);
  const int k1 = clamp_index(k0 + 1, dims[2]);

  const double f0 = c0 - i0;
  const double f1 = c1 - j0;
  const double f2 = c2 - k0;

  // 8-corner weighted sum, accumulated in a fixed corner order with weight
  // products associated as ((w0 * w1) * w2).
  const double w0[2] = {1.0 - f0, f0};
  const double w1[2] = {1.0 - f1, f1};
  const double w2[2] = {1.0 - f2, f2};
  const int ii[2] = {i0, i1};
  const int jj[2] = {j0, j1};
  const int kk[2] = {k0, k1};

  double acc = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double wab = w0[a] * w1[b];
      for (int c = 0; c < 2; ++c) {
        acc += (wab * w2[c]) * data[linear_index(dims, ii[a], jj[b], kk[c])];
      }
    }
  }
  return acc;
}

Volume warp_linear(const Volume& v, const DisplacementField& f) {
  require_same_dims(v.dims, f.dims, "warp_linear");
  Volume out(v.dims, v.spacing);
  const std::int64_t n = v.size();
  std::int64_t idx = 0;
  for (int i = 0; i < v.dims[0]; ++i) {
    for (int j = 0; j < v.dims[1]; ++j) {
      for (int k = 0; k < v.dims[2]; ++k, ++idx) {
        out.data[idx] = trilinear_sample(v.data.data(), v.dims, i + f.vectors[idx],
                                         j + f.vectors[n + idx], k + f.vectors[2 * n + idx]);
      }
    }
  }
  return out;
}

LabelMap warp_nearest(const LabelMap& s, const DisplacementField& f) {
  require_same_dims(s.dims, f.dims, "warp_nearest");
  LabelMap out(s.dims, s.num_classes);
  const std::int64_t n = s.size();
  std::int64_t idx = 0;
  for (int i = 0; i < s.dims[0]; ++i) {
    for (int j = 0; j < s.dims[1]; ++j) {
      for (int k = 0; k < s.dims[2]; ++k, ++idx) {
        // std::round rounds half away from zero, the documented rule.
        const int si = clamp_index(static_cast<int>(std::round(i + f.vectors[idx])), s.dims[0]);
        const int sj = clamp_index(static_cast<int>(std::round(j + f.vectors[n + idx])), s.dims[1]);
        const int sk = clamp_index(static_cast<int>(std::round(k + f.vectors[2 * n + idx])), s.dims[2]);
        out.labels[idx] = s.labels[linear_index(s.dims, si, sj, sk)];
      }
    }
  }
  return out;
}

ProbabilityMap warp_probmap(const ProbabilityMap& s, const DisplacementField& f) {
  require_same_dims(s.dims, f.dims, "warp_probmap");
  ProbabilityMap out(s.dims, s.num_classes);
  const std::int64_t n = s.size();
  for (int c = 0; c < s.num_classes; ++c) {
    const double* plane = s.values.data() + static_cast<std::size_t>(c) * n;
    double* out_plane = out.values.data() + static_cast<std::size_t>(c) * n;
    std::int64_t idx = 0;
    for (int i = 0; i < s.dims[0]; ++i) {
      for (int j = 0; j < s.dims[1]; ++j) {
        for (int k = 0; k < s.dims[2]; ++k, ++idx) {
          out_plane[idx] = trilinear_sample(plane, s.dims, i + f.vectors[idx],
                                            j + f.vectors[n + idx], k + f.vectors[2 * n + idx]);
        }
      }
    }
  }
  return out;
}

DisplacementField compose_fields(const DisplacementField& f, const DisplacementField& g) {
  require_same_dims(f.dims, g.dims, "compose_fields");
  DisplacementField out(f.dims);
  const std::int64_t n = f.size();
  const double* fx = f.vectors.data();
  const double* fy = fx + n;
  const double* fz = fy + n;
  std::int64_t idx = 0;
  for (int i = 0; i < f.dims[0]; ++i) {
    for (int j = 0; j < f.dims[1]; ++j) {
      for (int k = 0; k < f.dims[2]; ++k, ++idx) {
        const double q0 = i + g.vectors[idx];
        const double q1 = j + g.vectors[n + idx];
        const double q2 = k + g.vectors[2 * n + idx];
        out.vectors[idx] = g.vectors[idx] + trilinear_sample(fx, f.dims, q0, q1, q2);
        out.vectors[n + idx] = g.vectors[n + idx] + trilinear_sample(fy, f.dims, q0, q1, q2);
        out.vectors[2 * n + idx] = g.vectors[2 * n + idx] + trilinear_sample(fz, f.dims, q0, q1, q2);
      }
    }
  }
  return out;
}

InvertResult invert_field(const DisplacementField& f, int max_iters, double tol) {
  if (max_iters < 1) throw std::invalid_argument("invert_field: max_iters must be >= 1");
  if (tol <= 0.0) throw std::invalid_argument("invert_field: tol must be positive");

  const std::int64_t n = f.size();
  const double* fx = f.vectors.data();
  const double* fy = fx + n;
  const double* fz = fy + n;

  InvertResult res;
  res.field = DisplacementField(f.dims);
  DisplacementField next(f.dims);

  for (int iter = 0; iter < max_iters; ++iter) {
    double mean_update = 0.0;
    std::int64_t idx = 0;
    for (int i = 0; i < f.dims[0]; ++i) {
      for (int j = 0; j < f.dims[1]; ++j) {
        for (int k = 0; k < f.dims[2]; ++k, ++idx) {
          const double q0 = i + res.field.vectors[idx];
          const double q1 = j + res.field.vectors[n + idx];
          const double q2 = k + res.field.vectors[2 * n + idx];
          const double g0 = -trilinear_sample(fx, f.dims, q0, q1, q2);
          const double g1 = -trilinear_sample(fy, f.dims, q0, q1, q2);
          const double g2 = -trilinear_sample(fz, f.dims, q0, q1, q2);
          const double d0 = g0 - res.field.vectors[idx];
          const double d1 = g1 - res.field.vectors[n + idx];
          const double d2 = g2 - res.field.vectors[2 * n + idx];
          mean_update += std::sqrt(d0 * d0 + d1 * d1 + d2 * d2);
          next.vectors[idx] = g0;
          next.vectors[n + idx] = g1;
          next.vectors[2 * n + idx] = g2;
        }
      }
    }
    mean_update /= static_cast<double>(n);
    std::swap(res.field.vectors, next.vectors);
    res.iterations = iter + 1;
    if (mean_update < tol) break;
  }

  double residual = 0.0;
  std::int64_t idx = 0;
  for (int i = 0; i < f.dims[0]; ++i) {
    for (int j = 0; j < f.dims[1]; ++j) {
      for (int k = 0; k < f.dims[2]; ++k, ++idx) {
        const double q0 = i + res.field.vectors[idx];
        const double q1 = j + res.field.vectors[n + idx];
        const double q2 = k + res.field.vectors[2 * n + idx];
        const double r0 = res.field.vectors[idx] + trilinear_sample(fx, f.dims, q0, q1, q2);
        const double r1 = res.field.vectors[n + idx] + trilinear_sample(fy, f.dims, q0, q1, q2);
        const double r2 = res.field.vectors[2 * n + idx] + trilinear_sample(fz, f.dims, q0, q1, q2);
        residual += std::sqrt(r0 * r0 + r1 * r1 + r2 * r2);
      }
    }
  }
  res.mean_residual = residual / static_cast<double>(n);
  return res;
}

}  // namespace voxreg
