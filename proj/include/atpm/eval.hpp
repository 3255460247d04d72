#pragma once

// Cluster-validity metrics, k selection and the algorithm comparison harness.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atpm/cluster.hpp"
#include "atpm/distance_matrix.hpp"

namespace atpm::eval {

using cluster::FeatureMatrix;

double sse(const FeatureMatrix& features, std::span<const int> labels,
           const FeatureMatrix& centroids);

/// Mean silhouette; items in singleton clusters score 0.
double silhouette(const DistanceMatrix& distances, std::span<const int> labels);

/// Calinski-Harabasz index about the global mean.
double ch_score(const FeatureMatrix& features, std::span<const int> labels);

/// k with the largest drop below the chord joining the first and last curve
/// points; interior points only, lowest k on ties.
int elbow_select(std::span<const int> ks, std::span<const double> sse_curve);

/// Elbow k unless the silhouette argmax is more than one step away from it.
int select_k(std::span<const int> ks, std::span<const double> sse_curve,
             std::span<const double> silhouette_curve);

double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// Classical (Torgerson) scaling. Each axis is signed so that its largest
/// absolute coordinate is positive.
FeatureMatrix classical_mds(const DistanceMatrix& distances, std::size_t dims);

struct ValidityCurve {
  std::vector<int> ks;
  std::vector<double> sse;         // sum of squared distances to the medoid
  std::vector<double> silhouette;  // NaN where undefined (k = 1)
  std::vector<std::vector<int>> labels;
};

/// Nested medoid clustering for each k in [k_min, k_max]: the centers for k+1
/// start from those for k plus the best greedy addition, and refinement
/// minimizes squared medoid distance, so the SSE curve never increases.
ValidityCurve validity_curve(const DistanceMatrix& distances, int k_min, int k_max);

struct ValidityReport {
  ValidityCurve curve;
  int elbow_k = 0;
  std::optional<int> silhouette_k;
  int chosen_k = 0;
  int cak_k = 0;
  std::optional<double> cak_silhouette;
  std::optional<double> cak_ch;
  std::optional<double> ari;  // vs ground truth when available

  std::string to_json() const;
};

struct ComparisonRow {
  std::string method;
  int run = 0;
  std::uint64_t seed = 0;
  int k = 0;
  std::optional<double> ch;
  std::string error;
};

struct ComparisonConfig {
  cluster::CakConfig cak;
  int restarts = 10;
  std::uint64_t seed = 0;
  int max_iter = 300;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;

  /// Median CH over the successful runs of `method`.
  std::optional<double> median_ch(const std::string& method) const;
  std::string to_csv() const;
};

/// Runs CAK, random-init K-means and random-init K-medoids with the CAK k on
/// the same items; every method is scored by CH on `features`.
ComparisonTable comparison_harness(const FeatureMatrix& features, const DistanceMatrix& distances,
                                   const ComparisonConfig& config);

}  // namespace atpm::eval
