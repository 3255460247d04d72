#include "atpm/topology.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace atpm::topology {

std::vector<double> spectrum_profile(const walsh::WalshSpectrum& spectrum) {
  const auto& f = spectrum.coefficients;
  if (f.size() < 2) return {};
  const double scale = 1.0 / static_cast<double>(f.size());
  std::vector<double> g(f.size() - 1);
  for (std::size_t m = 1; m < f.size(); ++m) g[m - 1] = std::abs(f[m]) * scale;
  return g;
}

PersistenceDiagram sublevel_persistence(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) throw InvalidArgument("sublevel_persistence: empty input");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  });
  // rank[v] orders vertices by (value, index); a lower rank is the elder.
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;

  constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> parent(n, kAbsent);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };

  PersistenceDiagram dgm;
  for (std::size_t v : order) {
    parent[v] = v;
    for (std::size_t u : {v - 1, v + 1}) {
      if (u >= n || parent[u] == kAbsent) continue;  // v - 1 wraps when v == 0
      std::size_t a = find(u);
      std::size_t b = find(v);
      if (a == b) continue;
      if (rank[a] > rank[b]) std::swap(a, b);  // a is the elder root
      const double birth = values[b];
      const double death = values[v];
      if (death > birth) dgm.pairs.push_back({birth, death, false});
      parent[b] = a;
    }
  }
  dgm.pairs.push_back({values[order.front()], values[order.back()], true});
  std::sort(dgm.pairs.begin(), dgm.pairs.end());
  return dgm;
}

double LandscapeGrid::step() const {
  return size < 2 ? 0.0 : (t_max - t_min) / static_cast<double>(size - 1);
}

double LandscapeGrid::at(std::size_t i) const {
  if (i + 1 == size) return t_max;
  return t_min + static_cast<double>(i) * step();
}

LandscapeGrid shared_grid(std::span<const PersistenceDiagram> diagrams,
                          std::size_t grid_size) {
  if (grid_size < 2) throw InvalidArgument("landscape grid needs at least 2 points");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& d : diagrams) {
    for (const auto& p : d.pairs) {
      lo = std::min(lo, p.birth);
      hi = std::max(hi, p.death);
    }
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi <= lo) hi = lo + 1.0;
  return {lo, hi, grid_size};
}

namespace {

double tent(const PersistencePair& p, double t) {
  return std::max(0.0, std::min(t - p.birth, p.death - t));
}

}  // namespace

double landscape_value(const PersistenceDiagram& diagram, std::size_t k, double t) {
  if (k >= diagram.pairs.size()) return 0.0;
  std::vector<double> tents;
  tents.reserve(diagram.pairs.size());
  for (const auto& p : diagram.pairs) tents.push_back(tent(p, t));
  std::nth_element(tents.begin(), tents.begin() + static_cast<std::ptrdiff_t>(k),
                   tents.end(), std::greater<>());
  return tents[k];
}

PersistenceLandscape landscape(const PersistenceDiagram& diagram,
                               std::size_t k_levels, const LandscapeGrid& grid) {
  if (k_levels == 0) throw InvalidArgument("landscape needs at least one level");
  if (grid.size < 2) throw InvalidArgument("landscape grid needs at least 2 points");

  PersistenceLandscape out;
  out.k_levels = k_levels;
  out.grid = grid;
  out.values.assign(k_levels * grid.size, 0.0);

  const std::size_t levels = std::min(k_levels, diagram.pairs.size());
  std::vector<double> tents(diagram.pairs.size());
  for (std::size_t i = 0; i < grid.size; ++i) {
    const double t = grid.at(i);
    for (std::size_t p = 0; p < diagram.pairs.size(); ++p) {
      tents[p] = tent(diagram.pairs[p], t);
    }
    std::partial_sort(tents.begin(), tents.begin() + static_cast<std::ptrdiff_t>(levels),
                      tents.end(), std::greater<>());
    for (std::size_t k = 0; k < levels; ++k) out.values[k * grid.size + i] = tents[k];
  }
  return out;
}

std::vector<double> landscape_vector(const PersistenceLandscape& landscape) {
  return landscape.values;
}

double landscape_distance(const PersistenceLandscape& a, const PersistenceLandscape& b) {
  if (a.k_levels != b.k_levels || !(a.grid == b.grid) ||
      a.values.size() != b.values.size()) {
    throw InvalidArgument("landscape_distance: landscapes use different grids");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    sum += d * d;
  }
  return std::sqrt(sum * a.grid.step());
}

}  // namespace atpm::topology
