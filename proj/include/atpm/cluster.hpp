#pragma once

// Two-stage clustering: affinity propagation proposes the number of clusters
// and their initial centers, then a K-means (feature vectors) or K-medoids
// (distance matrix) refinement settles the labels. Undersized clusters are
// merged into their nearest neighbour last.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "atpm/common.hpp"
#include "atpm/distance_matrix.hpp"

namespace atpm::cluster {

using FeatureMatrix = std::vector<std::vector<double>>;

struct ClusteringResult {
  std::vector<int> labels;
  std::vector<std::size_t> medoids;   // item index per cluster
  FeatureMatrix centroids;            // vector mode only
  int k = 0;
  std::vector<std::size_t> sizes;
  /// (source, target) cluster ids, both in the numbering of the result that
  /// was handed to merge_small_clusters.
  std::vector<std::pair<int, int>> merge_log;
  /// Refinement objective after every assignment pass.
  std::vector<double> objective_trace;
  int iterations = 0;  // assignment passes
  int updates = 0;     // passes that moved at least one center

  // Affinity-propagation diagnostics (cak_cluster only).
  std::vector<std::size_t> ap_exemplars;
  int ap_iterations = 0;
  bool ap_converged = true;
};

/// Recomputes `sizes` and `k` from `labels` and checks 0 <= label < k.
void recount(ClusteringResult& result);

/// Max-normalizes both inputs (a zero matrix stays zero) and returns
/// gamma * topo + (1 - gamma) * geo.
DistanceMatrix combine_matrices(const DistanceMatrix& topo, const DistanceMatrix& geo,
                                double gamma);

/// How the self-similarity is derived when no explicit preference is given.
/// `minimum` favours fewer clusters than `median`.
enum class PreferencePolicy { median, minimum };

PreferencePolicy parse_preference_policy(const std::string& text);
std::string to_string(PreferencePolicy policy);

struct ApConfig {
  double damping = 0.9;
  int max_iter = 1000;
  int convergence_window = 50;
  std::optional<double> preference;  // overrides the policy when set
  PreferencePolicy policy = PreferencePolicy::median;
  /// Adds a tiny seeded perturbation that breaks exact similarity ties.
  bool tie_noise = true;
  std::uint64_t seed = 0;
};

struct ApResult {
  std::vector<std::size_t> exemplars;  // ascending
  std::vector<int> labels;             // index into `exemplars`
  int iterations = 0;
  bool converged = false;
  double preference = 0.0;
};

/// Message passing on a dense row-major n x n similarity matrix.
ApResult affinity_propagation(std::span<const double> similarity, std::size_t n,
                              const ApConfig& config);
/// Convenience overload on similarity = -distance.
ApResult affinity_propagation(const DistanceMatrix& distances, const ApConfig& config);

double median_off_diagonal(std::span<const double> similarity, std::size_t n);
double min_off_diagonal(std::span<const double> similarity, std::size_t n);

ClusteringResult kmeans_refine_vector(const FeatureMatrix& features,
                                      const FeatureMatrix& init_centroids,
                                      int max_iter = 300);

ClusteringResult kmedoids_refine_matrix(const DistanceMatrix& distances,
                                        const std::vector<std::size_t>& init_medoids,
                                        int max_iter = 300);

/// Member minimizing the summed distance to the other members; lowest index
/// on ties.
std::size_t representative(const ClusteringResult& result, const DistanceMatrix& distances,
                           int cluster_id);

ClusteringResult merge_small_clusters(ClusteringResult result,
                                      const DistanceMatrix& distances,
                                      std::size_t min_size);

enum class RefineMode { matrix, vector };

RefineMode parse_refine_mode(const std::string& text);
std::string to_string(RefineMode mode);

struct CakConfig {
  ApConfig ap;
  RefineMode mode = RefineMode::matrix;
  std::optional<std::size_t> min_size;  // default: max(5, ceil(0.05 n))
  int max_iter = 300;
};

std::size_t default_min_size(std::size_t n);

ClusteringResult cak_cluster(const FeatureMatrix& features, const DistanceMatrix& distances,
                             const CakConfig& config);

/// Euclidean distances between feature rows.
DistanceMatrix euclidean_distances(const FeatureMatrix& features, unsigned threads = 1);

}  // namespace atpm::cluster
