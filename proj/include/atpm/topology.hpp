#pragma once

// 0-dimensional sublevel-set persistence on a path graph and persistence
// landscapes sampled on a shared grid.

#include <cstddef>
#include <span>
#include <vector>

#include "atpm/walsh.hpp"

namespace atpm::topology {

struct PersistencePair {
  double birth = 0.0;
  double death = 0.0;
  bool essential = false;

  double persistence() const { return death - birth; }
  friend bool operator==(const PersistencePair&, const PersistencePair&) = default;
  friend auto operator<=>(const PersistencePair&, const PersistencePair&) = default;
};

struct PersistenceDiagram {
  std::vector<PersistencePair> pairs;  // sorted ascending
};

/// |F(m)| / T2 for every sequency except the first (DC) row.
std::vector<double> spectrum_profile(const walsh::WalshSpectrum& spectrum);

/// H0 persistence of the sublevel filtration of `values` on the path complex.
/// Components are born at local minima and the younger one dies on a merge
/// (ties: lower vertex index is older). The global-minimum component is
/// reported once with death capped at the global maximum and `essential` set.
/// Pairs with zero persistence are not reported.
PersistenceDiagram sublevel_persistence(std::span<const double> values);

struct LandscapeGrid {
  double t_min = 0.0;
  double t_max = 1.0;
  std::size_t size = 64;

  double step() const;
  double at(std::size_t i) const;
  friend bool operator==(const LandscapeGrid&, const LandscapeGrid&) = default;
};

/// Grid spanning [min birth, max death] over all diagrams. A degenerate range
/// is widened to unit length.
LandscapeGrid shared_grid(std::span<const PersistenceDiagram> diagrams,
                          std::size_t grid_size);

struct PersistenceLandscape {
  std::size_t k_levels = 0;
  LandscapeGrid grid;
  std::vector<double> values;  // k_levels x grid.size, row-major

  double operator()(std::size_t k, std::size_t i) const {
    return values[k * grid.size + i];
  }
};

/// Value at t of the k-th largest tent max(0, min(t - b, d - t)); k is 0-based.
double landscape_value(const PersistenceDiagram& diagram, std::size_t k, double t);

PersistenceLandscape landscape(const PersistenceDiagram& diagram,
                               std::size_t k_levels, const LandscapeGrid& grid);

std::vector<double> landscape_vector(const PersistenceLandscape& landscape);

/// Discretized L2 distance: Euclidean norm of the difference times sqrt(step).
double landscape_distance(const PersistenceLandscape& a, const PersistenceLandscape& b);

}  // namespace atpm::topology
