#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "atpm/geometry.hpp"
#include "atpm/ingest.hpp"

using namespace atpm;
using Seq = std::vector<Code>;

namespace {

Seq random_seq(std::mt19937_64& rng, std::size_t max_len) {
  Seq s(rng() % (max_len + 1));
  for (auto& c : s) c = static_cast<Code>(rng() % 4);
  return s;
}

}  // namespace

TEST_CASE("edit distance examples") {
  CHECK(geometry::edit_distance(Seq{1, 2, 1, 2}, Seq{1, 2, 1, 2}) == 0.0);
  CHECK(geometry::edit_distance(Seq{1, 2}, Seq{2, 1}) == 2.0);
  CHECK(geometry::edit_distance(Seq{1, 2, 3}, Seq{}) == 3.0);
  CHECK(geometry::edit_distance(Seq{1, 2, 3}, Seq{}, 2.5) == 7.5);
  // cheap indels make a shift cheaper than substitutions
  CHECK(geometry::edit_distance(Seq{1, 2, 3, 0}, Seq{2, 3, 0, 1}, 0.5) == 1.0);
}

TEST_CASE("edit distance matches plain recursion") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 400; ++trial) {
    const Seq x = random_seq(rng, 6), y = random_seq(rng, 6);
    const double indel = (trial % 3 == 0) ? 0.5 : 1.0;
    CHECK(geometry::edit_distance(x, y, indel) == oracle::recursive_edit(x, y, indel));
  }
}

TEST_CASE("edit distance is a metric") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 500; ++trial) {
    const Seq x = random_seq(rng, 10), y = random_seq(rng, 10), z = random_seq(rng, 10);
    const double xy = geometry::edit_distance(x, y), yz = geometry::edit_distance(y, z),
                 xz = geometry::edit_distance(x, z);
    CHECK(xy == geometry::edit_distance(y, x));
    CHECK((xy == 0.0) == (x == y));
    CHECK(xz <= xy + yz);
  }
}

TEST_CASE("agenda dissimilarity") {
  CHECK(geometry::agenda_dissimilarity(Seq{1, 1, 2, 2}, Seq{2, 2, 1, 1}, 16) == 0.0);
  CHECK(geometry::agenda_dissimilarity(Seq{1, 1}, Seq{2}, 16) == 16.0);
  CHECK(geometry::agenda_dissimilarity(Seq{1, 2}, Seq{1, 3}, 16) == doctest::Approx(32.0 / 3.0));
  CHECK(geometry::agenda_dissimilarity(Seq{}, Seq{}, 16) == 0.0);
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const Seq x = random_seq(rng, 6), y = random_seq(rng, 6);
    const double m = geometry::agenda_dissimilarity(x, y, 16);
    CHECK(m >= 0.0);
    CHECK(m <= 16.0);
    const std::set<Code> a(x.begin(), x.end()), b(y.begin(), y.end());
    CHECK((m == 0.0) == (a == b));
  }
}

TEST_CASE("agenda triple with equal edit distance") {
  // Every pair is 16 apart by edit distance, so only the agenda term can
  // tell the pair with shared activity types from the disjoint one.
  const Seq a{1, 1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 2, 2};
  const Seq b{2, 2, 2, 2, 2, 2, 2, 2, 1, 1, 1, 1, 1, 1, 1, 1};
  const Seq c{3, 3, 3, 3, 3, 3, 3, 3, 0, 0, 0, 0, 0, 0, 0, 0};
  CHECK(geometry::edit_distance(a, b) == 16.0);
  CHECK(geometry::edit_distance(a, c) == 16.0);
  CHECK(geometry::agenda_dissimilarity(a, b, 16) == 0.0);
  CHECK(geometry::agenda_dissimilarity(a, c, 16) == 16.0);
  CHECK(geometry::agenda_dissimilarity(b, c, 16) == 16.0);
}

TEST_CASE("combined distance weights") {
  const Seq x{1, 2, 2, 1}, y{1, 3, 3, 3};
  const double edit = geometry::edit_distance(x, y);
  const double agenda = geometry::agenda_dissimilarity(x, y, 4);
  CHECK(geometry::combined_distance(x, y, {1.0, 4.0, 1.0, 0.0}) == edit);
  CHECK(geometry::combined_distance(x, y, {1.0, 4.0, 0.0, 1.0}) == agenda);
  CHECK(geometry::combined_distance(x, x, {1.0, 4.0, 0.3, 0.7}) == 0.0);
  CHECK_THROWS_AS(geometry::GeometryConfig({-1.0, 4.0, 0.5, 0.5}).validate(), InvalidArgument);
}

TEST_CASE("geometric matrix equals pairwise recomputation") {
  std::mt19937_64 rng(29);
  std::vector<CodeSequence> series(5, CodeSequence(24));
  for (auto& s : series) {
    for (auto& c : s) c = static_cast<Code>(rng() % 4);
  }
  const geometry::GeometryConfig cfg;
  const auto m = geometry::geometric_distance_matrix(series, cfg, 6, {}, 2);
  m.validate();
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      const auto xi = ingest::resample(series[i], 6), xj = ingest::resample(series[j], 6);
      geometry::GeometryConfig resolved = cfg;
      resolved.agenda = 4.0;  // resampled length
      CHECK(m(i, j) == geometry::combined_distance(xi, xj, resolved));
    }
  }
  const std::vector<CodeSequence> same(4, CodeSequence(12, 1));
  CHECK(geometry::geometric_distance_matrix(same, cfg, 1).max() == 0.0);
}
