#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "support/oracles.hpp"
#include "voxreg/resampler.hpp"
#include "voxreg/simulator.hpp"

using namespace voxreg;

TEST_CASE("warp_linear with a zero field is the identity") {
  RandomStream rng(2);
  Volume v = testing::random_volume({4, 5, 3}, rng);
  DisplacementField f(v.dims);
  Volume out = warp_linear(v, f);
  for (std::size_t i = 0; i < v.data.size(); ++i) CHECK(out.data[i] == v.data[i]);
}

TEST_CASE("warp_linear of a ramp under a constant shift clamps at the border") {
  const Dims dims{3, 3, 5};
  Volume v(dims, {1, 1, 1});
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 5; ++k) v.at(i, j, k) = static_cast<double>(k);
    }
  }
  DisplacementField f(dims);
  std::fill(f.vectors.begin() + 2 * f.size(), f.vectors.end(), 1.0);
  Volume out = warp_linear(v, f);
  for (int k = 0; k < 5; ++k) {
    CHECK(out.at(1, 1, k) == doctest::Approx(std::min(k + 1, 4)));
  }
}

TEST_CASE("warp_linear matches the brute-force oracle exactly on 3^3 grids") {
  RandomStream rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    Volume v = testing::random_volume({3, 3, 3}, rng);
    DisplacementField f = testing::random_field(v.dims, rng, 1.0);
    Volume out = warp_linear(v, f);
    std::int64_t idx = 0;
    const std::int64_t n = v.size();
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k, ++idx) {
          const double expected = testing::oracle_trilinear(
              v.data, v.dims, i + f.vectors[idx], j + f.vectors[n + idx], k + f.vectors[2 * n + idx]);
          CHECK(out.data[idx] == expected);  // bit-exact
        }
      }
    }
  }
}

TEST_CASE("warp_linear output stays within the input range") {
  RandomStream rng(29);
  Volume v = testing::random_volume({5, 5, 5}, rng, -2.0, 3.0);
  const double lo = *std::min_element(v.data.begin(), v.data.end());
  const double hi = *std::max_element(v.data.begin(), v.data.end());
  DisplacementField f = testing::random_field(v.dims, rng, 4.0);
  Volume out = warp_linear(v, f);
  for (double x : out.data) {
    CHECK(x >= lo - 1e-12);
    CHECK(x <= hi + 1e-12);
  }
}

TEST_CASE("warp_nearest rounding and identity") {
  const Dims dims{1, 1, 5};
  LabelMap s(dims, 5);
  s.labels = {0, 1, 2, 3, 4};

  DisplacementField zero(dims);
  CHECK(warp_nearest(s, zero).labels == s.labels);

  DisplacementField f04(dims);
  std::fill(f04.vectors.begin() + 2 * f04.size(), f04.vectors.end(), 0.4);
  CHECK(warp_nearest(s, f04).labels == s.labels);

  DisplacementField f06(dims);
  std::fill(f06.vectors.begin() + 2 * f06.size(), f06.vectors.end(), 0.6);
  const LabelMap shifted = warp_nearest(s, f06);
  for (int k = 0; k < 4; ++k) CHECK(shifted.labels[k] == s.labels[k + 1]);
  CHECK(shifted.labels[4] == s.labels[4]);  // clamped
}

TEST_CASE("warp_nearest never invents labels") {
  RandomStream rng(31);
  LabelMap s = testing::random_labels({4, 4, 4}, 3, rng);
  for (auto& l : s.labels) {
    if (l == 1) l = 2;  // alphabet {0, 2}
  }
  DisplacementField f = testing::random_field(s.dims, rng, 2.5);
  LabelMap out = warp_nearest(s, f);
  for (auto l : out.labels) CHECK(l != 1);
}

TEST_CASE("warp_probmap splits a one-hot plane across straddled voxels") {
  const Dims dims{1, 1, 4};
  ProbabilityMap p(dims, 2);
  for (std::int64_t i = 0; i < p.size(); ++i) p.at(0, i) = 1.0;
  p.at(0, 2) = 0.0;
  p.at(1, 2) = 1.0;  // single foreground voxel at k = 2

  DisplacementField f(dims);
  std::fill(f.vectors.begin() + 2 * f.size(), f.vectors.end(), 0.5);
  ProbabilityMap out = warp_probmap(p, f);
  // Sampling at k + 0.5 straddles the foreground voxel from k = 1 and k = 2.
  CHECK(out.at(1, 1) == doctest::Approx(0.5));
  CHECK(out.at(1, 2) == doctest::Approx(0.5));
}

TEST_CASE("warp_probmap preserves per-voxel class sums") {
  RandomStream rng(37);
  ProbabilityMap p({4, 4, 4}, 3);
  for (std::int64_t i = 0; i < p.size(); ++i) {
    double a = rng.unit(), b = rng.unit();
    if (a > b) std::swap(a, b);
    p.at(0, i) = a;
    p.at(1, i) = b - a;
    p.at(2, i) = 1.0 - b;
  }
  DisplacementField f = testing::random_field(p.dims, rng, 3.0);
  ProbabilityMap out = warp_probmap(p, f);
  for (std::int64_t i = 0; i < out.size(); ++i) {
    CHECK(out.at(0, i) + out.at(1, i) + out.at(2, i) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("compose_fields identities and translations") {
  RandomStream rng(41);
  DisplacementField f = testing::random_field({4, 4, 4}, rng, 1.0);
  DisplacementField zero(f.dims);

  DisplacementField fz = compose_fields(f, zero);
  for (std::size_t i = 0; i < f.vectors.size(); ++i) CHECK(fz.vectors[i] == doctest::Approx(f.vectors[i]));
  DisplacementField zf = compose_fields(zero, f);
  for (std::size_t i = 0; i < f.vectors.size(); ++i) CHECK(zf.vectors[i] == doctest::Approx(f.vectors[i]));

  DisplacementField ta(f.dims), tb(f.dims);
  std::fill(ta.vectors.begin(), ta.vectors.begin() + ta.size(), 1.0);              // (1,0,0)
  std::fill(tb.vectors.begin() + tb.size(), tb.vectors.begin() + 2 * tb.size(), 1.0);  // (0,1,0)
  DisplacementField tc = compose_fields(ta, tb);
  // Interior voxels see the exact composite translation.
  for (int i = 1; i < 3; ++i) {
    for (int j = 1; j < 3; ++j) {
      for (int k = 1; k < 3; ++k) {
        CHECK(tc.at(0, i, j, k) == doctest::Approx(1.0));
        CHECK(tc.at(1, i, j, k) == doctest::Approx(1.0));
        CHECK(tc.at(2, i, j, k) == doctest::Approx(0.0));
      }
    }
  }
}

TEST_CASE("warping by a composite approximates the double warp") {
  const Dims dims{8, 8, 8};
  // Smooth volume (double interpolation error scales with its curvature).
  Volume v(dims, {1, 1, 1});
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      for (int k = 0; k < 8; ++k) {
        v.at(i, j, k) = 0.5 + 0.3 * std::sin(0.25 * i + 0.1) * std::cos(0.22 * j) * std::sin(0.2 * k + 0.4);
      }
    }
  }
  // Smooth fields: constant plus a gentle linear variation.
  DisplacementField f(dims), g(dims);
  const std::int64_t n = voxel_count(dims);
  std::int64_t idx = 0;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      for (int k = 0; k < 8; ++k, ++idx) {
        f.vectors[idx] = 0.3 + 0.02 * i;
        f.vectors[n + idx] = -0.2 + 0.02 * j;
        f.vectors[2 * n + idx] = 0.1;
        g.vectors[idx] = -0.25;
        g.vectors[n + idx] = 0.15 + 0.01 * k;
        g.vectors[2 * n + idx] = 0.2 - 0.01 * i;
      }
    }
  }
  Volume direct = warp_linear(v, compose_fields(f, g));
  Volume stepwise = warp_linear(warp_linear(v, f), g);
  for (int i = 2; i < 6; ++i) {
    for (int j = 2; j < 6; ++j) {
      for (int k = 2; k < 6; ++k) {
        CHECK(std::abs(direct.at(i, j, k) - stepwise.at(i, j, k)) < 1e-2);
      }
    }
  }
}

TEST_CASE("invert_field trivial cases") {
  DisplacementField zero({4, 4, 4});
  InvertResult rz = invert_field(zero, 50, 1e-3);
  CHECK(rz.iterations == 1);
  for (double x : rz.field.vectors) CHECK(x == 0.0);

  DisplacementField t({4, 4, 4});
  std::fill(t.vectors.begin(), t.vectors.begin() + t.size(), 0.75);
  InvertResult rt = invert_field(t, 50, 1e-3);
  for (std::int64_t i = 0; i < t.size(); ++i) CHECK(rt.field.vectors[i] == doctest::Approx(-0.75));
  CHECK(rt.mean_residual < 1e-12);
}

TEST_CASE("invert_field handles a default simulator field on 32^3") {
  SimulatorConfig cfg;
  cfg.seed = 5;
  RandomStream rng(cfg.seed);
  SampledTransform t = sample_transform(cfg, rng);
  DisplacementField f = build_affine_field(t, {32, 32, 32});
  DisplacementField e = build_elastic_field(t, {32, 32, 32}, rng);
  for (std::size_t i = 0; i < f.vectors.size(); ++i) f.vectors[i] += e.vectors[i];

  InvertResult inv = invert_field(f, 50, 1e-3);
  CHECK(inv.mean_residual < 0.1);

  // compose(f, invert(f)) equals the reported residual field.
  DisplacementField comp = compose_fields(f, inv.field);
  double mean_mag = 0.0;
  const std::int64_t n = comp.size();
  for (std::int64_t i = 0; i < n; ++i) {
    mean_mag += std::sqrt(comp.vectors[i] * comp.vectors[i] +
                          comp.vectors[n + i] * comp.vectors[n + i] +
                          comp.vectors[2 * n + i] * comp.vectors[2 * n + i]);
  }
  mean_mag /= static_cast<double>(n);
  CHECK(mean_mag == doctest::Approx(inv.mean_residual).epsilon(1e-9));
}

TEST_CASE("compose of translation with its inverse is below 10x the tolerance") {
  DisplacementField t({5, 5, 5});
  const std::int64_t n = t.size();
  std::fill(t.vectors.begin(), t.vectors.begin() + n, 1.2);
  std::fill(t.vectors.begin() + n, t.vectors.begin() + 2 * n, -0.7);
  InvertResult inv = invert_field(t, 50, 1e-3);
  DisplacementField comp = compose_fields(t, inv.field);
  double mean_mag = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    mean_mag += std::sqrt(comp.vectors[i] * comp.vectors[i] +
                          comp.vectors[n + i] * comp.vectors[n + i] +
                          comp.vectors[2 * n + i] * comp.vectors[2 * n + i]);
  }
  mean_mag /= static_cast<double>(n);
  CHECK(mean_mag < 10.0 * 1e-3);
}

TEST_CASE("dims mismatches are rejected") {
  Volume v({4, 4, 4}, {1, 1, 1});
  DisplacementField f({4, 4, 5});
  CHECK_THROWS_AS(warp_linear(v, f), std::invalid_argument);
  LabelMap s({4, 4, 4}, 2);
  CHECK_THROWS_AS(warp_nearest(s, f), std::invalid_argument);
  DisplacementField g({4, 4, 4});
  CHECK_THROWS_AS(compose_fields(f, g), std::invalid_argument);
}
