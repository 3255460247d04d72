#pragma once

// End-to-end orchestration: config, stages and on-disk artifacts.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "atpm/cluster.hpp"
#include "atpm/eval.hpp"
#include "atpm/geometry.hpp"
#include "atpm/ingest.hpp"
#include "atpm/report.hpp"
#include "atpm/topology.hpp"

namespace atpm::pipeline {

inline constexpr const char* kVersion = "0.1.0";

/// Raised for configuration problems; the CLI maps it to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class WalshMode { integer, one_hot };

struct SynthSettings {
  int per_spec_count = 40;
  int days = 7;
  double flip_prob = 0.05;
  double jitter_minutes = 20.0;
};

struct RunConfig {
  // Empty input paths fall back to the files `synth` writes into output_dir.
  std::string activities_path;
  std::string profiles_path;
  std::string truth_path;  // optional pid,label file for ARI
  std::string output_dir = "out";

  std::string window_start = "2019-08-05 00:00";
  int window_days = 7;
  int granularity = 10;
  int resample_factor = 6;

  ingest::CleaningConfig cleaning;

  WalshMode walsh_mode = WalshMode::integer;
  std::size_t k_levels = 5;
  std::size_t grid_size = 64;

  geometry::GeometryConfig geometry;
  double gamma = 0.5;

  cluster::ApConfig ap = [] {
    cluster::ApConfig a;
    a.policy = cluster::PreferencePolicy::minimum;
    return a;
  }();
  cluster::RefineMode refine_mode = cluster::RefineMode::matrix;
  std::optional<std::size_t> min_cluster_size;

  int k_min = 2;
  int k_max = 10;
  int harness_restarts = 10;
  std::size_t harness_dims = 8;
  std::size_t mds_dims = 2;

  report::DemographicsConfig demographics;
  SynthSettings synth;

  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool diagnostics = false;

  std::string activities_file() const;
  /// Empty when no profile file is configured or present.
  std::string profiles_file() const;

  /// Range and consistency checks. `check_paths` also requires the input
  /// files to exist.
  void validate(bool check_paths) const;

  nlohmann::ordered_json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
};

struct TopologicalFeatures {
  std::vector<std::vector<topology::PersistenceDiagram>> diagrams;  // person x channel
  topology::LandscapeGrid grid;
  cluster::FeatureMatrix vectors;
};

/// Spectrum -> profile -> diagram per person (and per channel in one-hot
/// mode), then landscapes on one grid shared by the whole population.
TopologicalFeatures topological_features(const std::vector<ingest::CategorizedSeries>& series,
                                         WalshMode mode, std::size_t k_levels,
                                         std::size_t grid_size, unsigned threads);

/// Pairwise landscape distances (discretized L2).
DistanceMatrix topological_distance_matrix(const TopologicalFeatures& features,
                                           std::vector<std::string> ids, unsigned threads);

// Stage artifacts.
std::string write_series(const std::vector<ingest::CategorizedSeries>& series);
std::vector<ingest::CategorizedSeries> read_series(const std::string& text);
std::string write_assignments(const std::vector<std::string>& pids, const std::vector<int>& labels);
std::vector<std::pair<std::string, int>> read_assignments(const std::string& text);

struct IngestOutput {
  std::vector<ingest::CategorizedSeries> series;
  std::vector<ingest::PersonProfile> profiles;
  ingest::CleaningReport report;
  std::vector<ingest::RowError> row_errors;
};

struct ClusterOutput {
  std::vector<std::string> pids;
  cluster::ClusteringResult result;
  eval::ValidityReport validity;
  eval::ComparisonTable comparison;
  cluster::FeatureMatrix mds;
};

IngestOutput run_ingest(const RunConfig& config);
ClusterOutput run_cluster(const RunConfig& config,
                          const std::vector<ingest::CategorizedSeries>& series,
                          const std::vector<int>* truth = nullptr);

/// Per-cluster share tables and representatives.
std::vector<report::ClusterProfile> cluster_profiles(
    const std::vector<ingest::CategorizedSeries>& series, const std::vector<int>& labels,
    const DistanceMatrix* distances);

// Subcommands. Each reads prior artifacts from the output directory and
// writes its own.
void stage_synth(const RunConfig& config);
void stage_ingest(const RunConfig& config);
void stage_cluster(const RunConfig& config);
void stage_report(const RunConfig& config);

/// All stages in order plus manifest.json. Returns 0 on success, 1 on a
/// stage failure (the manifest then records the failing stage).
int run_pipeline(const RunConfig& config);

std::filesystem::path output_path(const RunConfig& config, const std::string& name);

}  // namespace atpm::pipeline
