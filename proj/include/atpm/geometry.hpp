#pragma once

// Sequence-level dissimilarities: alignment edit distance, agenda (activity
// set) dissimilarity and their weighted sum.

#include <optional>
#include <span>
#include <vector>

#include "atpm/common.hpp"
#include "atpm/distance_matrix.hpp"

namespace atpm::geometry {

struct GeometryConfig {
  double indel = 1.0;                // d
  std::optional<double> agenda;      // Y; unset means "sequence length"
  double w_edit = 0.5;               // w1
  double w_agenda = 0.5;             // w2

  void validate() const;
};

/// Needleman-Wunsch minimum cost with indel cost `indel` and 0/1 substitution.
double edit_distance(std::span<const Code> x, std::span<const Code> y, double indel = 1.0);

/// Y * (1 - |A n B| / |A u B|) over the sets of distinct codes.
double agenda_dissimilarity(std::span<const Code> x, std::span<const Code> y, double agenda);

/// w1 * edit + w2 * agenda. `agenda` must be resolved by the caller when the
/// config leaves it unset.
double combined_distance(std::span<const Code> x, std::span<const Code> y,
                         const GeometryConfig& config);

/// Pairwise combined distance over series resampled by `resample_factor`.
/// Unset Y defaults to the resampled length.
DistanceMatrix geometric_distance_matrix(const std::vector<CodeSequence>& series,
                                         const GeometryConfig& config,
                                         int resample_factor,
                                         std::vector<std::string> ids = {},
                                         unsigned threads = 1);

}  // namespace atpm::geometry
