#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "voxreg/resampler.hpp"
#include "voxreg/simulator.hpp"

using namespace voxreg;

namespace {

SimulatorConfig zero_width_config() {
  SimulatorConfig cfg;
  cfg.rot_max = {0, 0, 0};
  cfg.scale_min = {1, 1, 1};
  cfg.scale_max = {1, 1, 1};
  cfg.trans_max = {0, 0, 0};
  cfg.elastic_gamma_max = 0.0;
  cfg.smooth_sigma_min = 10.0;
  cfg.smooth_sigma_max = 10.0;
  return cfg;
}

}  // namespace

TEST_CASE("zero-width bounds give the unique transform") {
  SimulatorConfig cfg = zero_width_config();
  cfg.scale_min = cfg.scale_max = {0.9, 0.9, 0.9};
  RandomStream rng(1);
  SampledTransform t = sample_transform(cfg, rng);
  for (int a = 0; a < 3; ++a) {
    CHECK(t.angles[a] == 0.0);
    CHECK(t.scales[a] == 0.9);
    CHECK(t.translation[a] == 0.0);
  }
  CHECK(t.elastic_gamma == 0.0);
  CHECK(t.smooth_sigma == 10.0);
}

TEST_CASE("sample_transform is deterministic per seed") {
  SimulatorConfig cfg;
  RandomStream a(42), b(42);
  SampledTransform ta = sample_transform(cfg, a);
  SampledTransform tb = sample_transform(cfg, b);
  CHECK(ta.angles == tb.angles);
  CHECK(ta.scales == tb.scales);
  CHECK(ta.translation == tb.translation);
  CHECK(ta.elastic_gamma == tb.elastic_gamma);
  CHECK(ta.smooth_sigma == tb.smooth_sigma);
}

TEST_CASE("sampled parameters match the uniform means within 3 standard errors") {
  SimulatorConfig cfg;
  RandomStream rng(123);
  const int n = 10000;
  double sum_angle[3] = {0, 0, 0}, sum_scale[3] = {0, 0, 0}, sum_trans[3] = {0, 0, 0};
  double sum_gamma = 0.0, sum_sigma = 0.0;
  for (int s = 0; s < n; ++s) {
    SampledTransform t = sample_transform(cfg, rng);
    for (int a = 0; a < 3; ++a) {
      sum_angle[a] += t.angles[a];
      sum_scale[a] += t.scales[a];
      sum_trans[a] += t.translation[a];
    }
    sum_gamma += t.elastic_gamma;
    sum_sigma += t.smooth_sigma;
  }
  auto check_mean = [n](double sum, double lo, double hi) {
    const double mean = sum / n;
    const double se = (hi - lo) / std::sqrt(12.0 * n);
    CHECK(std::abs(mean - 0.5 * (lo + hi)) < 3.0 * se);
  };
  for (int a = 0; a < 3; ++a) {
    check_mean(sum_angle[a], 0.0, cfg.rot_max[a]);
    check_mean(sum_scale[a], cfg.scale_min[a], cfg.scale_max[a]);
    check_mean(sum_trans[a], -cfg.trans_max[a], cfg.trans_max[a]);
  }
  check_mean(sum_gamma, 0.0, cfg.elastic_gamma_max);
  check_mean(sum_sigma, cfg.smooth_sigma_min, cfg.smooth_sigma_max);
}

TEST_CASE("identity transform builds a zero affine field") {
  SampledTransform t;
  t.scales = {1, 1, 1};
  DisplacementField f = build_affine_field(t, {4, 5, 6});
  for (double x : f.vectors) CHECK(x == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("pure translation builds a constant field") {
  SampledTransform t;
  t.scales = {1, 1, 1};
  t.translation = {1.0 / 8.0, 0, 0};  // one voxel along axis 0 on an 8-voxel axis
  DisplacementField f = build_affine_field(t, {8, 8, 8});
  const std::int64_t n = f.size();
  for (std::int64_t i = 0; i < n; ++i) {
    CHECK(f.vectors[i] == doctest::Approx(1.0));
    CHECK(f.vectors[n + i] == doctest::Approx(0.0));
    CHECK(f.vectors[2 * n + i] == doctest::Approx(0.0));
  }
}

TEST_CASE("pure scale field evaluated at hand-picked voxels") {
  SampledTransform t;
  t.scales = {2, 1, 1};
  DisplacementField f = build_affine_field(t, {5, 5, 5});
  // Centre voxel is fixed.
  CHECK(f.at(0, 2, 2, 2) == doctest::Approx(0.0));
  CHECK(f.at(1, 2, 2, 2) == doctest::Approx(0.0));
  CHECK(f.at(2, 2, 2, 2) == doctest::Approx(0.0));
  // F((4,2,2)) = 2*(4-2) + 2 - 4 = 2 along axis 0.
  CHECK(f.at(0, 4, 2, 2) == doctest::Approx(2.0));
  CHECK(f.at(1, 4, 2, 2) == doctest::Approx(0.0));
  CHECK(f.at(2, 4, 2, 2) == doctest::Approx(0.0));
}

TEST_CASE("zero gamma gives a zero elastic field") {
  SampledTransform t;
  t.scales = {1, 1, 1};
  t.elastic_gamma = 0.0;
  t.smooth_sigma = 10.0;
  RandomStream rng(9);
  DisplacementField f = build_elastic_field(t, {6, 6, 6}, rng);
  for (double x : f.vectors) CHECK(x == 0.0);
}

TEST_CASE("gaussian kernel is unit-sum and truncated at ceil(3 sigma)") {
  const auto k1 = gaussian_kernel(1.0);
  CHECK(k1.size() == 7);  // radius 3
  double sum = 0.0;
  for (double w : k1) sum += w;
  CHECK(std::abs(sum - 1.0) < 1e-12);
}

TEST_CASE("smoothing a unit impulse reproduces the normalized kernel") {
  const double sigma = 2.0;
  const auto kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  REQUIRE(radius == 6);

  // Grid wide enough that no tap of the radius-6 kernel is dropped around
  // the impulse.
  const Dims dims{13, 13, 25};
  std::vector<double> data(voxel_count(dims), 0.0);
  const std::int64_t center = linear_index(dims, 6, 6, 12);
  data[center] = 1.0;
  gaussian_smooth(data, dims, sigma);

  const double kc = kernel[radius];
  for (int off = 0; off <= 6; ++off) {
    const double v = data[linear_index(dims, 6, 6, 12 + off)];
    // Separable response: kernel value along the offset axis, centre tap on
    // the other two.
    CHECK(v == doctest::Approx(kernel[radius + off] * kc * kc).epsilon(1e-12));
    // Profile normalized by the peak equals the 1-D kernel profile.
    CHECK(v / data[center] == doctest::Approx(kernel[radius + off] / kc).epsilon(1e-12));
  }
}

TEST_CASE("generate_pair with a zero-width config is the identity") {
  RandomStream data_rng(55);
  Volume m = testing::random_volume({8, 8, 8}, data_rng);
  LabelMap s = testing::random_labels({8, 8, 8}, 3, data_rng);
  SimulatorConfig cfg = zero_width_config();
  RandomStream rng(cfg.seed);
  GeneratedPair pair = generate_pair(m, &s, cfg, rng);
  for (double x : pair.field.vectors) CHECK(x == doctest::Approx(0.0).epsilon(1e-12));
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    CHECK(std::abs(pair.fixed.data[i] - m.data[i]) < 1e-6);
  }
  REQUIRE(pair.labels.has_value());
  CHECK(pair.labels->labels == s.labels);
}

TEST_CASE("pure integer translation shifts a ramp exactly on the interior") {
  const Dims dims{8, 8, 8};
  Volume m(dims, {1, 1, 1});
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      for (int k = 0; k < 8; ++k) m.at(i, j, k) = static_cast<double>(i);
    }
  }
  SimulatorConfig cfg = zero_width_config();
  cfg.trans_max = {1.0 / 8.0, 0, 0};

  // Force the translation draw to its upper bound by sampling the transform
  // directly.
  SampledTransform t;
  t.scales = {1, 1, 1};
  t.translation = {1.0 / 8.0, 0, 0};
  DisplacementField f = build_affine_field(t, dims);
  Volume warped = warp_linear(m, f);
  for (int i = 0; i < 7; ++i) {
    CHECK(warped.at(i, 4, 4) == doctest::Approx(static_cast<double>(i + 1)));
  }

  // Labels shifted by the same integer translation keep the interior multiset.
  LabelMap s(dims, 4);
  RandomStream rng(3);
  for (auto& l : s.labels) l = static_cast<std::int32_t>(rng.below(4));
  LabelMap sw = warp_nearest(s, f);
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 8; ++j) {
      for (int k = 0; k < 8; ++k) {
        CHECK(sw.at(i, j, k) == s.at(i + 1, j, k));
      }
    }
  }
}

TEST_CASE("generate_pair is bitwise deterministic per seed") {
  RandomStream data_rng(77);
  Volume m = testing::random_volume({8, 8, 8}, data_rng);
  SimulatorConfig cfg;
  RandomStream r1(99), r2(99);
  GeneratedPair p1 = generate_pair(m, nullptr, cfg, r1);
  GeneratedPair p2 = generate_pair(m, nullptr, cfg, r2);
  CHECK(p1.field.vectors == p2.field.vectors);
  CHECK(p1.fixed.data == p2.fixed.data);
}

TEST_CASE("elastic component stays smooth across 20 seeds") {
  const Dims dims{32, 32, 32};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SimulatorConfig cfg;
    cfg.seed = seed;
    RandomStream rng(seed);
    SampledTransform t = sample_transform(cfg, rng);
    if (t.elastic_gamma == 0.0) continue;
    DisplacementField e = build_elastic_field(t, dims, rng);
    const std::int64_t n = e.size();
    double mean_grad = 0.0;
    std::int64_t count = 0;
    for (int c = 0; c < 3; ++c) {
      for (int i = 0; i + 1 < 32; ++i) {
        for (int j = 0; j < 32; ++j) {
          for (int k = 0; k < 32; ++k) {
            const double d = e.vectors[c * n + linear_index(dims, i + 1, j, k)] -
                             e.vectors[c * n + linear_index(dims, i, j, k)];
            mean_grad += std::abs(d);
            ++count;
          }
        }
      }
    }
    mean_grad /= static_cast<double>(count);
    CHECK(mean_grad < t.elastic_gamma / t.smooth_sigma);
  }
}

TEST_CASE("generate_pair rejects mismatched label dims") {
  RandomStream rng(5);
  Volume m = testing::random_volume({4, 4, 4}, rng);
  LabelMap s({4, 4, 5}, 2);
  SimulatorConfig cfg;
  RandomStream gen(1);
  CHECK_THROWS_AS(generate_pair(m, &s, cfg, gen), std::invalid_argument);
}

TEST_CASE("invalid simulator configs are rejected") {
  SimulatorConfig cfg;
  cfg.scale_min = {0.0, 1, 1};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SimulatorConfig{};
  cfg.smooth_sigma_min = 5.0;
  cfg.smooth_sigma_max = 4.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
