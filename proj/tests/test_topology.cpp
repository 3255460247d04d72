#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "atpm/topology.hpp"
#include "atpm/walsh.hpp"

using namespace atpm;
using topology::PersistenceDiagram;
using topology::PersistencePair;

TEST_CASE("spectrum profile drops the DC row and scales by length") {
  CHECK(topology::spectrum_profile({{4, 0, 0, 0}, 4, 4}) == std::vector<double>{0, 0, 0});
  CHECK(topology::spectrum_profile({{0, 4, 0, 0}, 4, 4}) == std::vector<double>{1, 0, 0});
  CHECK(topology::spectrum_profile({{0, -4, 2, 0}, 4, 4}) == std::vector<double>{1, 0.5, 0});
}

TEST_CASE("sublevel persistence examples") {
  const std::vector<double> a{0, 2, 1, 3};
  CHECK(topology::sublevel_persistence(a).pairs ==
        std::vector<PersistencePair>{{0, 3, true}, {1, 2, false}});
  const std::vector<double> b{1, 2, 3, 4};
  CHECK(topology::sublevel_persistence(b).pairs == std::vector<PersistencePair>{{1, 4, true}});
  const std::vector<double> c{1, 0, 1, 0, 1};
  CHECK(topology::sublevel_persistence(c).pairs ==
        std::vector<PersistencePair>{{0, 1, false}, {0, 1, true}});
  const std::vector<double> flat{2, 2, 2};
  CHECK(topology::sublevel_persistence(flat).pairs == std::vector<PersistencePair>{{2, 2, true}});
  CHECK_THROWS_AS(topology::sublevel_persistence(std::vector<double>{}), InvalidArgument);
}

TEST_CASE("sweep matches the threshold oracle, including ties") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    std::vector<double> v(n);
    // small integer range forces plateaus and repeated minima
    for (auto& x : v) x = static_cast<double>(rng() % 6) / 5.0;
    CHECK(topology::sublevel_persistence(v).pairs == oracle::threshold_persistence(v));
  }
}

TEST_CASE("finite pairs equal local minima minus one on distinct values") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(2 + rng() % 60);
    for (auto& x : v) x = u(rng);
    const auto dgm = topology::sublevel_persistence(v);
    std::size_t finite = 0;
    for (const auto& p : dgm.pairs) finite += !p.essential;
    CHECK(finite + 1 == oracle::strict_local_minima(v));
  }
}

TEST_CASE("landscape hand examples") {
  const PersistenceDiagram one{{{0, 2, false}}};
  CHECK(topology::landscape_value(one, 0, 1.0) == 1.0);
  CHECK(topology::landscape_value(one, 0, 0.5) == 0.5);
  CHECK(topology::landscape_value(one, 1, 1.0) == 0.0);
  CHECK(topology::landscape_value(one, 0, 3.0) == 0.0);
  const PersistenceDiagram two{{{0, 2, false}, {1, 3, false}}};
  CHECK(topology::landscape_value(two, 0, 1.5) == 0.5);
  CHECK(topology::landscape_value(two, 1, 1.5) == 0.5);
}

TEST_CASE("landscape vectors and distances") {
  const topology::LandscapeGrid grid{0.0, 2.0, 3};
  CHECK(grid.step() == 1.0);
  const PersistenceDiagram one{{{0, 2, false}}};
  const auto l = topology::landscape(one, 1, grid);
  CHECK(topology::landscape_vector(l) == std::vector<double>{0, 1, 0});
  const auto zero = topology::landscape(PersistenceDiagram{}, 1, grid);
  CHECK(topology::landscape_vector(zero) == std::vector<double>{0, 0, 0});
  CHECK(topology::landscape_distance(zero, l) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(topology::landscape_distance(l, l) == 0.0);
  const auto other = topology::landscape(one, 1, topology::LandscapeGrid{0.0, 4.0, 3});
  CHECK_THROWS_AS(topology::landscape_distance(l, other), InvalidArgument);
}

TEST_CASE("shared grid spans every diagram") {
  const std::vector<PersistenceDiagram> dgms{{{{0.5, 2, false}}}, {{{0.1, 1, true}}}};
  const auto g = topology::shared_grid(dgms, 8);
  CHECK(g.t_min == 0.1);
  CHECK(g.t_max == 2.0);
  CHECK(g.at(0) == 0.1);
  CHECK(g.at(7) == doctest::Approx(2.0));
  const std::vector<PersistenceDiagram> flat{{{{1, 1, true}}}};
  const auto wide = topology::shared_grid(flat, 4);
  CHECK(wide.t_max - wide.t_min == doctest::Approx(1.0));
}

TEST_CASE("landscape laws on random diagrams") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    PersistenceDiagram d;
    const std::size_t m = rng() % 8;
    for (std::size_t i = 0; i < m; ++i) {
      const double b = u(rng), p = u(rng);
      d.pairs.push_back({b, b + p, false});
    }
    const topology::LandscapeGrid grid{0.0, 2.0, 41};
    const auto l = topology::landscape(d, 4, grid);
    for (std::size_t i = 0; i < grid.size; ++i) {
      for (std::size_t k = 0; k < 4; ++k) {
        CHECK(l(k, i) >= 0.0);
        if (k + 1 < 4) CHECK(l(k, i) >= l(k + 1, i));
        if (i + 1 < grid.size) CHECK(std::abs(l(k, i + 1) - l(k, i)) <= grid.step() + 1e-12);
      }
    }
  }
}

TEST_CASE("identical diagrams give identical vectors") {
  const std::vector<double> spectrum{0, 3, 1, 2, 0, 1, 1, 0};
  const auto profile = topology::spectrum_profile({spectrum, 8, 8});
  const auto d1 = topology::sublevel_persistence(profile);
  const auto d2 = topology::sublevel_persistence(profile);
  const std::vector<PersistenceDiagram> both{d1, d2};
  const auto grid = topology::shared_grid(both, 16);
  CHECK(topology::landscape_vector(topology::landscape(d1, 3, grid)) ==
        topology::landscape_vector(topology::landscape(d2, 3, grid)));
}
