#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "atpm/eval.hpp"

using namespace atpm;
using cluster::FeatureMatrix;

TEST_CASE("sum of squared errors") {
  const std::vector<int> one{0, 0};
  CHECK(eval::sse({{0}, {2}}, one, {{1}}) == 2.0);
  CHECK(eval::sse({{3, 3}, {3, 3}}, one, {{3, 3}}) == 0.0);
  CHECK(eval::sse({{0}, {4}}, one, {{2}}) == 4.0 * eval::sse({{0}, {2}}, one, {{1}}));
}

TEST_CASE("silhouette") {
  const auto d = DistanceMatrix::from_rows(
      {{0, 0.1, 10, 10.1}, {0.1, 0, 9.9, 10}, {10, 9.9, 0, 0.1}, {10.1, 10, 0.1, 0}});
  const std::vector<int> pairs{0, 0, 1, 1};
  const double s = eval::silhouette(d, pairs);
  CHECK(s > 0.9);
  // hand value: every point has a = 0.1; b is the mean distance to the other pair
  const double expected = ((1 - 0.1 / 10.05) + (1 - 0.1 / 9.95) + (1 - 0.1 / 9.95) + (1 - 0.1 / 10.05)) / 4;
  CHECK(s == doctest::Approx(expected).epsilon(1e-12));
  const std::vector<int> swapped{1, 1, 0, 0};
  CHECK(eval::silhouette(d, swapped) == s);
  const std::vector<int> singletons{0, 1, 2, 3};
  CHECK(eval::silhouette(d, singletons) == 0.0);
  const std::vector<int> one{0, 0, 0, 0};
  CHECK_THROWS_AS(eval::silhouette(d, one), InvalidArgument);
}

TEST_CASE("Calinski-Harabasz") {
  const FeatureMatrix x{{0}, {1}, {5}, {9}};
  const std::vector<int> labels{0, 0, 1, 2};
  // between = 2*3.25^2 + 1.25^2 + 5.25^2 = 50.25, within = 0.5, k = 3, n = 4
  CHECK(eval::ch_score(x, labels) == doctest::Approx(50.25).epsilon(1e-12));
  const FeatureMatrix scaled{{0}, {3}, {15}, {27}};
  CHECK(eval::ch_score(scaled, labels) == doctest::Approx(50.25).epsilon(1e-12));

  std::mt19937_64 rng(41);
  std::normal_distribution<double> noise(0, 0.3);
  for (int seed = 0; seed < 5; ++seed) {
    FeatureMatrix blobs;
    std::vector<int> truth, shuffled;
    for (int i = 0; i < 30; ++i) {
      blobs.push_back({noise(rng) + 5.0 * (i % 3), noise(rng)});
      truth.push_back(i % 3);
      shuffled.push_back(static_cast<int>(rng() % 3));
    }
    CHECK(eval::ch_score(blobs, truth) > eval::ch_score(blobs, shuffled));
  }
  const std::vector<int> one{0, 0, 0, 0};
  CHECK_THROWS_AS(eval::ch_score(x, one), InvalidArgument);
}

TEST_CASE("elbow and k selection") {
  const std::vector<int> ks{1, 2, 3, 4, 5, 6};
  const std::vector<double> curve{100, 50, 20, 18, 17, 16};
  CHECK(eval::elbow_select(ks, curve) == 3);
  const std::vector<double> linear{6, 5, 4, 3, 2, 1};
  CHECK(eval::elbow_select(ks, linear) == 2);
  const double nan = std::nan("");
  const std::vector<double> near{nan, 0.5, 0.7, 0.6, 0.4, 0.3};
  CHECK(eval::select_k(ks, curve, near) == 3);
  const std::vector<double> far{nan, 0.2, 0.3, 0.4, 0.5, 0.9};
  CHECK(eval::select_k(ks, curve, far) == 6);
}

TEST_CASE("adjusted Rand index") {
  const std::vector<int> a{0, 0, 1, 1}, b{0, 1, 0, 1}, c{1, 1, 0, 0};
  CHECK(eval::adjusted_rand_index(a, b) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(eval::adjusted_rand_index(a, a) == 1.0);
  CHECK(eval::adjusted_rand_index(a, c) == 1.0);
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> x(20), y(20);
    for (auto& v : x) v = static_cast<int>(rng() % 4);
    for (auto& v : y) v = static_cast<int>(rng() % 3);
    CHECK(eval::adjusted_rand_index(x, y) == doctest::Approx(oracle::ari(x, y)).epsilon(1e-12));
  }
}

TEST_CASE("classical scaling") {
  const auto d = DistanceMatrix::from_rows({{0, 1, 2}, {1, 0, 1}, {2, 1, 0}});
  const auto x = eval::classical_mds(d, 1);
  CHECK(std::abs(x[0][0] - x[1][0]) == doctest::Approx(1.0));
  CHECK(std::abs(x[2][0] - x[0][0]) == doctest::Approx(2.0));

  const auto z = eval::classical_mds(DistanceMatrix(4), 2);
  for (const auto& row : z) {
    for (double v : row) CHECK(v == doctest::Approx(0.0));
  }

  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(-5, 5);
  FeatureMatrix pts(12, std::vector<double>(2));
  for (auto& p : pts) p = {u(rng), u(rng)};
  const auto dm = cluster::euclidean_distances(pts);
  const auto back = eval::classical_mds(dm, 2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const double dx = back[i][0] - back[j][0], dy = back[i][1] - back[j][1];
      CHECK(std::abs(std::sqrt(dx * dx + dy * dy) - dm(i, j)) < 1e-6);
    }
  }
}

TEST_CASE("validity curve is monotone and nested") {
  std::mt19937_64 rng(53);
  std::normal_distribution<double> noise(0, 0.5);
  FeatureMatrix x;
  for (int i = 0; i < 40; ++i) x.push_back({noise(rng) + 6.0 * (i % 4), noise(rng)});
  const auto d = cluster::euclidean_distances(x);
  const auto curve = eval::validity_curve(d, 1, 8);
  REQUIRE(curve.ks.size() == 8);
  CHECK(std::isnan(curve.silhouette[0]));
  for (std::size_t i = 1; i < curve.sse.size(); ++i) CHECK(curve.sse[i] <= curve.sse[i - 1] + 1e-12);
  CHECK(eval::select_k(curve.ks, curve.sse, curve.silhouette) == 4);
}

TEST_CASE("comparison harness") {
  std::mt19937_64 rng(59);
  std::normal_distribution<double> noise(0, 0.3);
  FeatureMatrix x;
  for (int i = 0; i < 45; ++i) x.push_back({noise(rng) + 5.0 * (i % 3), noise(rng)});
  const auto d = cluster::euclidean_distances(x);
  eval::ComparisonConfig cfg;
  cfg.restarts = 4;
  cfg.seed = 9;
  const auto t1 = eval::comparison_harness(x, d, cfg);
  const auto t2 = eval::comparison_harness(x, d, cfg);
  CHECK(t1.to_csv() == t2.to_csv());
  CHECK(t1.rows.size() == 9);
  REQUIRE(t1.median_ch("cak"));
  REQUIRE(t1.median_ch("kmeans_random"));
  CHECK(*t1.median_ch("cak") >= *t1.median_ch("kmeans_random") - 1e-9);

  const FeatureMatrix blob(10, std::vector<double>{1.0, 1.0});
  const auto flat = eval::comparison_harness(blob, DistanceMatrix(10), cfg);
  for (const auto& row : flat.rows) {
    CHECK(!row.ch.has_value());
    CHECK(!row.error.empty());
  }
}
