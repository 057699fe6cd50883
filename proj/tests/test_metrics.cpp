#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "voxreg/metrics.hpp"

using namespace voxreg;

TEST_CASE("epe basics and 3-4-5 norm") {
  const Dims dims{2, 2, 2};
  DisplacementField f(dims), g(dims);
  CHECK(epe(f, g, {1, 1, 1}) == 0.0);

  const std::int64_t n = f.size();
  std::fill(f.vectors.begin(), f.vectors.begin() + n, 3.0);
  std::fill(f.vectors.begin() + n, f.vectors.begin() + 2 * n, 4.0);
  CHECK(epe(f, g, {1, 1, 1}) == doctest::Approx(5.0));
}

TEST_CASE("epe matches the loop oracle, is symmetric and scales linearly") {
  RandomStream rng(3);
  const Dims dims{4, 4, 4};
  DisplacementField f = testing::random_field(dims, rng, 2.0);
  DisplacementField g = testing::random_field(dims, rng, 2.0);
  const Spacing sp{1.0, 1.0, 1.0};
  const double val = epe(f, g, sp);
  CHECK(std::abs(val - testing::oracle_epe(f.vectors, g.vectors, f.size(), sp)) < 1e-9);
  CHECK(epe(g, f, sp) == doctest::Approx(val).epsilon(1e-12));

  DisplacementField f2 = g;
  for (std::size_t i = 0; i < f2.vectors.size(); ++i) {
    f2.vectors[i] += 2.5 * (f.vectors[i] - g.vectors[i]);
  }
  CHECK(epe(f2, g, sp) == doctest::Approx(2.5 * val).epsilon(1e-9));
}

TEST_CASE("epe converts voxel offsets to millimetres through the spacing") {
  const Dims dims{2, 2, 2};
  DisplacementField f(dims), g(dims);
  std::fill(f.vectors.begin(), f.vectors.begin() + f.size(), 2.0);  // axis 0
  CHECK(epe(f, g, {1.5, 1.0, 1.0}) == doctest::Approx(3.0));
}

TEST_CASE("mse basics and oracle") {
  RandomStream rng(7);
  Volume a = testing::random_volume({4, 4, 4}, rng);
  CHECK(mse(a, a) == 0.0);

  Volume b = a;
  for (double& x : b.data) x += 0.5;
  CHECK(mse(a, b) == doctest::Approx(0.25).epsilon(1e-12));

  Volume c = testing::random_volume({4, 4, 4}, rng);
  CHECK(std::abs(mse(a, c) - testing::oracle_mse(a.data, c.data)) < 1e-12);
}

TEST_CASE("nlcc identities") {
  RandomStream rng(11);
  Volume a = testing::random_volume({6, 6, 6}, rng);
  CHECK(nlcc(a, a, 3) == doctest::Approx(1.0).epsilon(1e-4));

  Volume inv = a;
  for (double& x : inv.data) x = 1.0 - x;
  CHECK(nlcc(a, inv, 3) == doctest::Approx(1.0).epsilon(1e-4));  // squared form is sign-blind
}

TEST_CASE("nlcc matches the per-window covariance oracle") {
  RandomStream rng(13);
  Volume a = testing::random_volume({7, 7, 7}, rng);
  Volume b = testing::random_volume({7, 7, 7}, rng);
  CHECK(std::abs(nlcc(a, b, 3) - testing::oracle_nlcc(a.data, b.data, a.dims, 3)) < 1e-6);
  CHECK(std::abs(nlcc(a, b, 5) - testing::oracle_nlcc(a.data, b.data, a.dims, 5)) < 1e-6);
}

TEST_CASE("nlcc is invariant under affine intensity changes") {
  RandomStream rng(17);
  Volume a = testing::random_volume({6, 6, 6}, rng);
  Volume b = testing::random_volume({6, 6, 6}, rng);
  Volume b2 = b;
  for (double& x : b2.data) x = 1.7 * x + 0.3;
  CHECK(std::abs(nlcc(a, b, 5) - nlcc(a, b2, 5)) < 1e-3);
}

TEST_CASE("nlcc rejects bad windows") {
  Volume a({4, 4, 4}, {1, 1, 1}, 0.0);
  CHECK_THROWS_AS(nlcc(a, a, 4), std::invalid_argument);
  CHECK_THROWS_AS(nlcc(a, a, 5), std::invalid_argument);  // larger than the volume
}

TEST_CASE("mutual information closed forms") {
  // Identical binary volumes: MI = ln 2.
  Volume a({2, 2, 2}, {1, 1, 1});
  a.data = {0, 1, 0, 1, 0, 1, 0, 1};
  CHECK(mutual_information(a, a, 10) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // Independent by construction: all four (a, b) combinations equally likely.
  Volume x({2, 2, 1}, {1, 1, 1}), y({2, 2, 1}, {1, 1, 1});
  x.data = {0, 0, 1, 1};
  y.data = {0, 1, 0, 1};
  CHECK(std::abs(mutual_information(x, y, 10)) < 1e-9);
}

TEST_CASE("mutual information equals entropy on identical input and matches the oracle") {
  RandomStream rng(19);
  Volume a = testing::random_volume({5, 5, 5}, rng);
  Volume b = testing::random_volume({5, 5, 5}, rng);
  const int bins = 10;
  CHECK(std::abs(mutual_information(a, b, bins) -
                 testing::oracle_mutual_information(a.data, b.data, bins)) < 1e-9);

  // Entropy of the histogram of a.
  std::vector<double> counts(bins, 0.0);
  for (double v : a.data) {
    counts[std::min(static_cast<int>(v * bins), bins - 1)] += 1.0;
  }
  double entropy = 0.0;
  for (double c : counts) {
    if (c > 0) {
      const double p = c / static_cast<double>(a.data.size());
      entropy -= p * std::log(p);
    }
  }
  CHECK(mutual_information(a, a, bins) == doctest::Approx(entropy).epsilon(1e-9));
  CHECK(mutual_information(a, b, bins) >= -1e-9);
}

TEST_CASE("mutual information rejects unnormalized input") {
  Volume a({2, 2, 2}, {1, 1, 1}, 0.5);
  Volume b({2, 2, 2}, {1, 1, 1}, 1.5);
  CHECK_THROWS_AS(mutual_information(a, b, 10), std::invalid_argument);
}

TEST_CASE("dice closed forms") {
  const Dims dims{1, 1, 8};
  LabelMap pred(dims, 2), truth(dims, 2);
  // |pred| = 3, |truth| = 4, intersection 2 -> 4/7.
  for (int k = 0; k < 3; ++k) pred.labels[k] = 1;
  for (int k = 1; k < 5; ++k) truth.labels[k] = 1;
  CHECK(dice(pred, truth, 1) == doctest::Approx(4.0 / 7.0));

  CHECK(dice(truth, truth, 1) == 1.0);
  CHECK(dice(truth, truth, 0) == 1.0);

  LabelMap left(dims, 2), right(dims, 2);
  for (int k = 0; k < 4; ++k) left.labels[k] = 1;
  for (int k = 4; k < 8; ++k) right.labels[k] = 1;
  CHECK(dice(left, right, 1) == 0.0);

  // Class absent from both maps.
  LabelMap empty_a(dims, 3), empty_b(dims, 3);
  CHECK(dice(empty_a, empty_b, 2) == 1.0);

  RandomStream rng(23);
  LabelMap p = testing::random_labels({4, 4, 4}, 3, rng);
  LabelMap t = testing::random_labels({4, 4, 4}, 3, rng);
  for (int c = 0; c < 3; ++c) {
    CHECK(dice(p, t, c) == doctest::Approx(testing::oracle_dice(p.labels, t.labels, c)));
  }
}

TEST_CASE("majority vote resolves ties toward the smallest class") {
  const Dims dims{1, 1, 1};
  LabelMap a(dims, 3), b(dims, 3), c(dims, 3), d(dims, 3);
  a.labels = {2};
  b.labels = {1};
  c.labels = {1};
  d.labels = {2};
  CHECK(majority_vote({a, b, c}).labels[0] == 1);       // clear majority
  CHECK(majority_vote({a, b, c, d}).labels[0] == 1);    // 2-2 tie -> smaller index
}

TEST_CASE("uncertainty map counts disagreement") {
  const Dims dims{1, 1, 2};
  LabelMap a(dims, 2), b(dims, 2), c(dims, 2);
  b.labels = {1, 0};
  std::vector<LabelMap> votes{a, b, c};
  LabelMap consensus = majority_vote(votes);
  Volume u = uncertainty_map(votes, consensus);
  CHECK(u.data[0] == doctest::Approx(1.0 / 3.0));
  CHECK(u.data[1] == doctest::Approx(0.0));

  // All agree everywhere -> identically zero.
  Volume uz = uncertainty_map({a, a, a}, a);
  for (double x : uz.data) CHECK(x == 0.0);
}

TEST_CASE("uncertainty values are multiples of 1/N and match a counting oracle") {
  RandomStream rng(29);
  const int n_atlas = 5;
  std::vector<LabelMap> votes;
  for (int i = 0; i < n_atlas; ++i) votes.push_back(testing::random_labels({3, 3, 3}, 3, rng));
  LabelMap consensus = majority_vote(votes);
  Volume u = uncertainty_map(votes, consensus);
  for (std::int64_t v = 0; v < consensus.size(); ++v) {
    int agree = 0;
    for (const auto& s : votes) agree += (s.labels[v] == consensus.labels[v]) ? 1 : 0;
    CHECK(u.data[v] == doctest::Approx(1.0 - agree / static_cast<double>(n_atlas)));
    const double scaled = u.data[v] * n_atlas;
    CHECK(std::abs(scaled - std::round(scaled)) < 1e-12);
    CHECK(u.data[v] <= 1.0 - 1.0 / n_atlas + 1e-12);
  }
}

TEST_CASE("uncertainty map rejects an empty vote list") {
  LabelMap consensus({1, 1, 1}, 2);
  CHECK_THROWS_AS(uncertainty_map({}, consensus), std::invalid_argument);
}
