#include "voxreg/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "voxreg/resampler.hpp"

namespace voxreg {

void SimulatorConfig::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (rot_max[a] < 0.0) throw std::invalid_argument("simulator: rot_max must be >= 0");
    if (scale_min[a] <= 0.0 || scale_min[a] > scale_max[a]) {
      throw std::invalid_argument("simulator: require 0 < scale_min <= scale_max");
    }
    if (trans_max[a] < 0.0) throw std::invalid_argument("simulator: trans_max must be >= 0");
  }
  if (elastic_gamma_max < 0.0) throw std::invalid_argument("simulator: elastic_gamma_max must be >= 0");
  if (smooth_sigma_min > smooth_sigma_max) {
    throw std::invalid_argument("simulator: require smooth_sigma_min <= smooth_sigma_max");
  }
  if (smooth_sigma_min <= 0.0) throw std::invalid_argument("simulator: smoothing sigma must be positive");
}

SampledTransform sample_transform(const SimulatorConfig& cfg, RandomStream& rng) {
  cfg.validate();
  SampledTransform t;
  for (int a = 0; a < 3; ++a) t.angles[a] = rng.uniform(0.0, cfg.rot_max[a]);
  for (int a = 0; a < 3; ++a) t.scales[a] = rng.uniform(cfg.scale_min[a], cfg.scale_max[a]);
  for (int a = 0; a < 3; ++a) t.translation[a] = rng.uniform(-cfg.trans_max[a], cfg.trans_max[a]);
  t.elastic_gamma = rng.uniform(0.0, cfg.elastic_gamma_max);
  t.smooth_sigma = rng.uniform(cfg.smooth_sigma_min, cfg.smooth_sigma_max);
  return t;
}

namespace {

// Rotation about `axis` by angle `a`, acting on the other two coordinates.
std::array<std::array<double, 3>, 3> axis_rotation(int axis, double a) {
  const int u = (axis + 1) % 3;
  const int v = (axis + 2) % 3;
  std::array<std::array<double, 3>, 3> m{};
  m[axis][axis] = 1.0;
  m[u][u] = std::cos(a);
  m[u][v] = -std::sin(a);
  m[v][u] = std::sin(a);
  m[v][v] = std::cos(a);
  return m;
}

std::array<std::array<double, 3>, 3> matmul(const std::array<std::array<double, 3>, 3>& a,
                                            const std::array<std::array<double, 3>, 3>& b) {
  std::array<std::array<double, 3>, 3> c{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
    }
  }
  return c;
}

}  // namespace

DisplacementField build_affine_field(const SampledTransform& t, const Dims& dims) {
  check_dims(dims);
  auto m = matmul(axis_rotation(0, t.angles[0]),
                  matmul(axis_rotation(1, t.angles[1]), axis_rotation(2, t.angles[2])));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m[i][j] *= t.scales[j];
  }

  const std::array<double, 3> ctr{(dims[0] - 1) / 2.0, (dims[1] - 1) / 2.0, (dims[2] - 1) / 2.0};
  const std::array<double, 3> shift{t.translation[0] * dims[0], t.translation[1] * dims[1],
                                    t.translation[2] * dims[2]};

  DisplacementField out(dims);
  const std::int64_t n = out.size();
  std::int64_t idx = 0;
  for (int i = 0; i < dims[0]; ++i) {
    const double r0 = i - ctr[0];
    for (int j = 0; j < dims[1]; ++j) {
      const double r1 = j - ctr[1];
      for (int k = 0; k < dims[2]; ++k, ++idx) {
        const double r2 = k - ctr[2];
        out.vectors[idx] = m[0][0] * r0 + m[0][1] * r1 + m[0][2] * r2 + ctr[0] + shift[0] - i;
        out.vectors[n + idx] = m[1][0] * r0 + m[1][1] * r1 + m[1][2] * r2 + ctr[1] + shift[1] - j;
        out.vectors[2 * n + idx] = m[2][0] * r0 + m[2][1] * r1 + m[2][2] * r2 + ctr[2] + shift[2] - k;
      }
    }
  }
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("gaussian_kernel: sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int j = -radius; j <= radius; ++j) {
    const double w = std::exp(-0.5 * (j / sigma) * (j / sigma));
    k[j + radius] = w;
    sum += w;
  }
  for (double& w : k) w /= sum;
  return k;
}

namespace {

// Separable convolution along `axis`. Taps falling outside the grid are
// dropped (zero boundary): replicating border samples would pile the tail
// mass of these wide kernels onto the edge voxels and keep a large share of
// the raw noise variance on desk-scale grids, defeating the smoothing.
void smooth_axis(std::vector<double>& plane, const Dims& dims, int axis, const std::vector<double>& kernel) {
  const int radius = static_cast<int>(kernel.size() / 2);
  const int d = dims[axis];
  std::vector<double> line(d);

  // Strides of the toolkit layout.
  const std::int64_t strides[3] = {static_cast<std::int64_t>(dims[1]) * dims[2], dims[2], 1};
  const int o1 = (axis + 1) % 3;
  const int o2 = (axis + 2) % 3;

  for (int a = 0; a < dims[o1]; ++a) {
    for (int b = 0; b < dims[o2]; ++b) {
      const std::int64_t base = a * strides[o1] + b * strides[o2];
      for (int i = 0; i < d; ++i) line[i] = plane[base + i * strides[axis]];
      for (int i = 0; i < d; ++i) {
        double acc = 0.0;
        const int j_lo = std::max(-radius, -i);
        const int j_hi = std::min(radius, d - 1 - i);
        for (int j = j_lo; j <= j_hi; ++j) {
          acc += kernel[j + radius] * line[i + j];
        }
        plane[base + i * strides[axis]] = acc;
      }
    }
  }
}

}  // namespace

void gaussian_smooth(std::vector<double>& data, const Dims& dims, double sigma) {
  if (data.size() != static_cast<std::size_t>(voxel_count(dims))) {
    throw std::invalid_argument("gaussian_smooth: data length does not match dims");
  }
  const auto kernel = gaussian_kernel(sigma);
  for (int axis = 0; axis < 3; ++axis) smooth_axis(data, dims, axis, kernel);
}

DisplacementField build_elastic_field(const SampledTransform& t, const Dims& dims, RandomStream& rng) {
  check_dims(dims);
  DisplacementField out(dims);
  const std::int64_t n = out.size();
  for (int c = 0; c < 3; ++c) {
    for (std::int64_t i = 0; i < n; ++i) out.vectors[c * n + i] = rng.normal(0.0, t.elastic_gamma);
  }
  if (t.elastic_gamma == 0.0) return out;

  for (int c = 0; c < 3; ++c) {
    std::vector<double> plane(out.vectors.begin() + c * n, out.vectors.begin() + (c + 1) * n);
    gaussian_smooth(plane, dims, t.smooth_sigma);
    std::copy(plane.begin(), plane.end(), out.vectors.begin() + c * n);
  }
  return out;
}

GeneratedPair generate_pair(const Volume& moving, const LabelMap* moving_labels,
                            const SimulatorConfig& cfg, RandomStream& rng) {
  if (moving_labels != nullptr) {
    require_same_dims(moving.dims, moving_labels->dims, "generate_pair");
  }
  GeneratedPair pair;
  pair.transform = sample_transform(cfg, rng);
  pair.field = build_affine_field(pair.transform, moving.dims);
  const DisplacementField elastic = build_elastic_field(pair.transform, moving.dims, rng);
  for (std::size_t i = 0; i < pair.field.vectors.size(); ++i) {
    pair.field.vectors[i] += elastic.vectors[i];
  }
  pair.fixed = warp_linear(moving, pair.field);
  if (moving_labels != nullptr) {
    pair.labels = warp_nearest(*moving_labels, pair.field);
  }
  return pair;
}

}  // namespace voxreg
