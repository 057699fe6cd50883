// Dense volumetric data model shared by every other component.
//
// Conventions, fixed toolkit-wide:
//   * dims = {d0, d1, d2} with axis 0 slowest-varying in memory; the linear
//     index of voxel (i, j, k) is (i * d1 + j) * d2 + k.
//   * Voxel centers sit at integer coordinates 0 .. dim-1 per axis.
//   * Displacement vectors are stored in voxel units, component c displacing
//     along axis c. Physical spacing enters only where stated (resampling,
//     millimetre metrics).
#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace voxreg {

using Dims = std::array<int, 3>;
using Spacing = std::array<double, 3>;

inline std::int64_t voxel_count(const Dims& dims) {
  return static_cast<std::int64_t>(dims[0]) * dims[1] * dims[2];
}

inline void check_dims(const Dims& dims) {
  if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0) {
    throw std::invalid_argument("dims must be positive");
  }
}

inline std::int64_t linear_index(const Dims& dims, int i, int j, int k) {
  return (static_cast<std::int64_t>(i) * dims[1] + j) * dims[2] + k;
}

// Dense scalar grid with per-axis voxel spacing in millimetres.
struct Volume {
  Dims dims{0, 0, 0};
  Spacing spacing{1.0, 1.0, 1.0};
  std::vector<double> data;

  Volume() = default;
  Volume(const Dims& d, const Spacing& s, double fill = 0.0)
      : dims(d), spacing(s), data(static_cast<std::size_t>(voxel_count(d)), fill) {
    check_dims(d);
    for (double sp : spacing) {
      if (sp <= 0.0) throw std::invalid_argument("spacing must be positive");
    }
  }

  std::int64_t size() const { return voxel_count(dims); }
  double& at(int i, int j, int k) { return data[linear_index(dims, i, j, k)]; }
  double at(int i, int j, int k) const { return data[linear_index(dims, i, j, k)]; }
};

// Per-voxel 3-vector offsets in voxel units, component-major storage:
// component c of voxel v lives at c * voxel_count + v.
struct DisplacementField {
  Dims dims{0, 0, 0};
  std::vector<double> vectors;

  DisplacementField() = default;
  explicit DisplacementField(const Dims& d)
      : dims(d), vectors(static_cast<std::size_t>(3 * voxel_count(d)), 0.0) {
    check_dims(d);
  }

  std::int64_t size() const { return voxel_count(dims); }
  double& at(int c, std::int64_t v) { return vectors[c * size() + v]; }
  double at(int c, std::int64_t v) const { return vectors[c * size() + v]; }
  double& at(int c, int i, int j, int k) { return vectors[c * size() + linear_index(dims, i, j, k)]; }
  double at(int c, int i, int j, int k) const { return vectors[c * size() + linear_index(dims, i, j, k)]; }
};

// Integer class index per voxel; every label must be < num_classes.
struct LabelMap {
  Dims dims{0, 0, 0};
  int num_classes = 1;
  std::vector<std::int32_t> labels;

  LabelMap() = default;
  LabelMap(const Dims& d, int classes)
      : dims(d), num_classes(classes), labels(static_cast<std::size_t>(voxel_count(d)), 0) {
    check_dims(d);
    if (classes <= 0) throw std::invalid_argument("num_classes must be positive");
  }

  std::int64_t size() const { return voxel_count(dims); }
  std::int32_t& at(int i, int j, int k) { return labels[linear_index(dims, i, j, k)]; }
  std::int32_t at(int i, int j, int k) const { return labels[linear_index(dims, i, j, k)]; }
};

// Per-voxel per-class continuous values in [0, 1], class-major storage.
struct ProbabilityMap {
  Dims dims{0, 0, 0};
  int num_classes = 1;
  std::vector<double> values;

  ProbabilityMap() = default;
  ProbabilityMap(const Dims& d, int classes)
      : dims(d),
        num_classes(classes),
        values(static_cast<std::size_t>(classes) * static_cast<std::size_t>(voxel_count(d)), 0.0) {
    check_dims(d);
    if (classes <= 0) throw std::invalid_argument("num_classes must be positive");
  }

  std::int64_t size() const { return voxel_count(dims); }
  double& at(int c, std::int64_t v) { return values[static_cast<std::size_t>(c) * size() + v]; }
  double at(int c, std::int64_t v) const { return values[static_cast<std::size_t>(c) * size() + v]; }
};

inline void require_same_dims(const Dims& a, const Dims& b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": dims mismatch");
}

}  // namespace voxreg
