#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "voxreg/preprocess.hpp"

using namespace voxreg;

TEST_CASE("normalize maps min/max to [0, 1] without clipping") {
  Volume v({1, 1, 4}, {1, 1, 1});
  v.data = {0.0, 1.0, 2.0, 3.0};
  Volume out = normalize(v);
  CHECK(out.data[0] == doctest::Approx(0.0));
  CHECK(out.data[1] == doctest::Approx(1.0 / 3.0));
  CHECK(out.data[2] == doctest::Approx(2.0 / 3.0));
  CHECK(out.data[3] == doctest::Approx(1.0));
  CHECK(out.dims == v.dims);
  CHECK(out.spacing == v.spacing);
}

TEST_CASE("normalize clips an outlier at mean + 6 sigma") {
  // Base values around 0.5 plus one outlier; statistics recomputed here by
  // independent summation.
  Volume v({4, 4, 4}, {1, 1, 1});
  RandomStream rng(11);
  for (auto& x : v.data) x = 0.5 + rng.uniform(-0.15, 0.15);
  v.data[13] = 10.0;

  double mean = 0.0;
  for (double x : v.data) mean += x;
  mean /= static_cast<double>(v.data.size());
  double var = 0.0;
  for (double x : v.data) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.data.size());
  const double sigma = std::sqrt(var);
  const double hi = mean + 6.0 * sigma;
  REQUIRE(hi < 10.0);  // the outlier really is clipped

  double lo_clip = hi;
  for (std::size_t i = 0; i < v.data.size(); ++i) {
    if (i != 13) lo_clip = std::min(lo_clip, v.data[i]);
  }

  Volume out = normalize(v);
  CHECK(out.data[13] == doctest::Approx(1.0));  // clipped value becomes the max
  // A non-outlier voxel maps affinely from [min, hi].
  CHECK(out.data[0] == doctest::Approx((v.data[0] - lo_clip) / (hi - lo_clip)).epsilon(1e-12));
}

TEST_CASE("normalize rejects constant volumes") {
  Volume v({2, 2, 2}, {1, 1, 1}, 0.7);
  CHECK_THROWS_WITH_AS(normalize(v), doctest::Contains("degenerate intensity range"),
                       std::invalid_argument);
}

TEST_CASE("normalize is idempotent when the second pass does not clip") {
  RandomStream rng(3);
  Volume v = testing::random_volume({6, 5, 4}, rng);
  Volume once = normalize(v);
  Volume twice = normalize(once);
  for (std::size_t i = 0; i < once.data.size(); ++i) {
    CHECK(std::abs(once.data[i] - twice.data[i]) < 1e-6);
  }
}

TEST_CASE("resample doubles the grid when halving the spacing") {
  Volume v({4, 4, 4}, {2, 2, 2});
  RandomStream rng(5);
  for (auto& x : v.data) x = rng.unit();
  Volume out = resample_to_spacing(v, {1, 1, 1});
  CHECK(out.dims == Dims{8, 8, 8});
  CHECK(out.spacing == Spacing{1, 1, 1});
}

TEST_CASE("resample with the source spacing is the identity") {
  RandomStream rng(7);
  Volume v = testing::random_volume({5, 6, 7}, rng);
  v.spacing = {1.5, 0.8, 2.0};
  Volume out = resample_to_spacing(v, v.spacing);
  REQUIRE(out.dims == v.dims);
  for (std::size_t i = 0; i < v.data.size(); ++i) {
    CHECK(std::abs(out.data[i] - v.data[i]) < 1e-6);
  }
}

TEST_CASE("resample of a linear ramp matches the analytic interpolant") {
  Volume v({4, 3, 3}, {2, 1, 1});
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) v.at(i, j, k) = static_cast<double>(i);
    }
  }
  Volume out = resample_to_spacing(v, {1, 1, 1});
  REQUIRE(out.dims == Dims{8, 3, 3});
  for (int i = 0; i < 8; ++i) {
    const double expected = std::min(0.5 * i, 3.0);  // clamped past the last center
    CHECK(out.at(i, 1, 1) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("resample rejects collapsing output dims") {
  Volume v({4, 4, 4}, {0.05, 1, 1});
  CHECK_THROWS_AS(resample_to_spacing(v, {1, 1, 1}), std::invalid_argument);
}

TEST_CASE("one_hot basics") {
  LabelMap s({1, 1, 1}, 3);
  s.labels = {2};
  ProbabilityMap p = one_hot(s);
  CHECK(p.at(0, 0) == 0.0);
  CHECK(p.at(1, 0) == 0.0);
  CHECK(p.at(2, 0) == 1.0);

  LabelMap bg({2, 2, 2}, 4);
  ProbabilityMap pbg = one_hot(bg);
  for (std::int64_t i = 0; i < bg.size(); ++i) CHECK(pbg.at(0, i) == 1.0);
}

TEST_CASE("argmax of one_hot recovers the labels") {
  RandomStream rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    LabelMap s = testing::random_labels({4, 5, 3}, 4, rng);
    LabelMap back = argmax_labels(one_hot(s));
    CHECK(back.labels == s.labels);
  }
}
