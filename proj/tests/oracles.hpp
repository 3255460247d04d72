#pragma once

// Reference implementations written independently of the library code, used
// to derive expected values in tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "atpm/common.hpp"
#include "atpm/topology.hpp"

namespace oracle {

/// Sylvester-Hadamard rows reordered by number of sign changes.
inline std::vector<std::vector<int>> walsh_by_sign_changes(std::size_t t2) {
  std::vector<std::vector<int>> h{{1}};
  while (h.size() < t2) {
    const std::size_t n = h.size();
    std::vector<std::vector<int>> next(2 * n, std::vector<int>(2 * n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        next[i][j] = h[i][j];
        next[i][j + n] = h[i][j];
        next[i + n][j] = h[i][j];
        next[i + n][j + n] = -h[i][j];
      }
    }
    h = std::move(next);
  }
  auto changes = [](const std::vector<int>& row) {
    int c = 0;
    for (std::size_t i = 1; i < row.size(); ++i) c += row[i] != row[i - 1];
    return c;
  };
  std::sort(h.begin(), h.end(), [&](const auto& a, const auto& b) { return changes(a) < changes(b); });
  return h;
}

inline std::vector<double> matrix_transform(const std::vector<std::vector<int>>& w,
                                            std::span<const double> x) {
  std::vector<double> out(w.size(), 0.0);
  for (std::size_t m = 0; m < w.size(); ++m) {
    for (std::size_t n = 0; n < x.size(); ++n) out[m] += w[m][n] * x[n];
  }
  return out;
}

/// H0 sublevel persistence by growing a threshold over the sorted distinct
/// values and recomputing path components from scratch at every level. A
/// component is identified by its oldest vertex (lowest value, then lowest
/// index); when an identity disappears it dies at the current level.
inline std::vector<atpm::topology::PersistencePair> threshold_persistence(std::span<const double> v) {
  std::vector<atpm::topology::PersistencePair> out;
  const std::size_t n = v.size();
  if (n == 0) return out;
  std::vector<double> levels(v.begin(), v.end());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  auto older = [&](std::size_t a, std::size_t b) {
    return v[a] < v[b] || (v[a] == v[b] && a < b);
  };
  std::set<std::size_t> alive;
  for (double level : levels) {
    std::set<std::size_t> reps;
    std::size_t i = 0;
    while (i < n) {
      if (v[i] > level) {
        ++i;
        continue;
      }
      std::size_t best = i;
      while (i < n && v[i] <= level) {
        if (older(i, best)) best = i;
        ++i;
      }
      reps.insert(best);
    }
    for (std::size_t r : alive) {
      if (!reps.count(r) && level - v[r] > 0.0) out.push_back({v[r], level, false});
    }
    alive = reps;
  }
  // one component remains at the top level: the global minimum
  const std::size_t root = *alive.begin();
  out.push_back({v[root], levels.back(), true});
  std::sort(out.begin(), out.end());
  return out;
}

inline std::size_t strict_local_minima(std::span<const double> v) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const bool left = i == 0 || v[i] < v[i - 1];
    const bool right = i + 1 == v.size() || v[i] < v[i + 1];
    count += left && right;
  }
  return count;
}

/// Plain recursion over the alignment definition (no memoization).
inline double recursive_edit(std::span<const atpm::Code> x, std::span<const atpm::Code> y,
                             double indel) {
  if (x.empty()) return indel * static_cast<double>(y.size());
  if (y.empty()) return indel * static_cast<double>(x.size());
  const double sub = x.back() == y.back() ? 0.0 : 1.0;
  const auto xs = x.first(x.size() - 1);
  const auto ys = y.first(y.size() - 1);
  return std::min({recursive_edit(xs, ys, indel) + sub, recursive_edit(xs, y, indel) + indel,
                   recursive_edit(x, ys, indel) + indel});
}

/// Pair-counting ARI from the contingency table.
inline double ari(std::span<const int> a, std::span<const int> b) {
  auto c2 = [](double m) { return m * (m - 1) / 2.0; };
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1;
    rows[a[i]] += 1;
    cols[b[i]] += 1;
  }
  double index = 0, sr = 0, sc = 0;
  for (auto& [k, m] : table) index += c2(m);
  for (auto& [k, m] : rows) sr += c2(m);
  for (auto& [k, m] : cols) sc += c2(m);
  const double expected = sr * sc / c2(static_cast<double>(a.size()));
  const double maximum = 0.5 * (sr + sc);
  if (maximum == expected) return 1.0;
  return (index - expected) / (maximum - expected);
}

}  // namespace oracle
