#pragma once

// Synthetic populations with known archetype labels.

#include <cstdint>
#include <string>
#include <vector>

#include "atpm/common.hpp"
#include "atpm/ingest.hpp"

namespace atpm::synth {

struct ScheduleBlock {
  double start_hour = 0.0;
  double end_hour = 0.0;
  Activity activity = Activity::home;
};

struct ArchetypeSpec {
  std::string name;
  std::vector<ScheduleBlock> weekday;
  std::vector<ScheduleBlock> weekend;
  double jitter_minutes = 20.0;
  double flip_prob = 0.05;
  /// Trip bins inserted before every change between two stays.
  int trip_minutes = 30;

  /// Throws InvalidArgument unless both templates tile [0, 24) in order and
  /// 0 <= flip_prob < 0.5.
  void validate() const;
};

/// Multitasking, work-dominant, balanced, reverse-rhythm, home-dominant.
std::vector<ArchetypeSpec> default_archetypes(double flip_prob = 0.05,
                                              double jitter_minutes = 20.0);

struct PopulationConfig {
  int per_spec_count = 40;
  int days = 7;
  int granularity = 10;
  std::uint64_t seed = 1;
  ingest::Minutes start = 0;  // window start; default set by generate_population
};

/// Monday 2019-08-05 00:00.
ingest::Minutes default_start();

struct Population {
  std::vector<ingest::CategorizedSeries> series;  // pid order
  std::vector<int> labels;                        // archetype index per person
  std::vector<ingest::ActivityRecord> records;    // run-length stays/trips
  std::vector<ingest::PersonProfile> profiles;
};

Population generate_population(const std::vector<ArchetypeSpec>& specs,
                               const PopulationConfig& config);

/// Share of each activity code over an archetype's noise-free template week.
std::vector<double> template_shares(const ArchetypeSpec& spec);

/// pid,label CSV.
std::string write_truth(const Population& population);

}  // namespace atpm::synth
