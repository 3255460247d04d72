#pragma once

// Descriptive outputs per cluster: weekly hourly activity shares,
// representative sequences and demographic cross-tabulations.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "atpm/ingest.hpp"

namespace atpm::report {

inline constexpr int kWeekHours = 7 * 24;

/// Per (weekday, hour) cell: count of each activity code over member bins.
struct ShareTable {
  std::array<std::array<std::size_t, kActivityCount>, kWeekHours> counts{};

  std::size_t total(int cell) const;
  /// Share of `code` in the cell; 0 when the cell is unobserved.
  double share(int cell, int code) const;
};

/// Folds every member bin onto (weekday, hour) by its start time.
ShareTable activity_shares(const std::vector<const ingest::CategorizedSeries*>& members);

struct ClusterProfile {
  int cluster = 0;
  std::size_t size = 0;
  std::string representative_pid;
  ShareTable shares;
};

struct DemographicsConfig {
  /// Work share among waking bins above which a person counts as employed.
  double employment_threshold = 0.10;
  int waking_start_hour = 7;
  int waking_end_hour = 23;
  std::vector<std::string> brands = {"Apple", "Huawei", "Xiaomi"};
};

/// Employment proxy for one series: work-code share among waking-hour bins.
double waking_work_share(const ingest::CategorizedSeries& series,
                         const DemographicsConfig& config);

struct DemographicsRow {
  std::string variable;
  std::string category;
  std::vector<double> clusters;  // percent, or metric value
  double overall = 0.0;
};

struct DemographicsTable {
  int k = 0;
  std::vector<std::size_t> sizes;
  std::vector<DemographicsRow> rows;  // percentages over known values
  std::vector<DemographicsRow> unknown_counts;
  std::vector<DemographicsRow> arpu;  // mean and std (sample)

  std::string to_csv() const;
};

/// `pids[i]` carries label `labels[i]`; missing profiles count as unknown.
/// `series` (optional, same order as pids) feeds the employment proxy.
DemographicsTable demographics_table(const std::vector<int>& labels,
                                     const std::vector<std::string>& pids,
                                     const std::vector<ingest::PersonProfile>& profiles,
                                     const std::vector<ingest::CategorizedSeries>& series,
                                     const DemographicsConfig& config = {});

/// cluster,weekday,hour,code,share rows for observed cells.
std::string shares_csv(const std::vector<ClusterProfile>& profiles);
/// cluster,size,representative_pid
std::string clusters_csv(const std::vector<ClusterProfile>& profiles);
/// cluster,pid,sequence (one digit per bin)
std::string representatives_csv(const std::vector<ClusterProfile>& profiles,
                                 const std::vector<ingest::CategorizedSeries>& series);

}  // namespace atpm::report
