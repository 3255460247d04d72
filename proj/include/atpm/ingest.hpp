#pragma once

// Activity/profile record parsing, cleaning and construction of per-person
// categorized series.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "atpm/common.hpp"

namespace atpm::ingest {

/// Minutes since 1970-01-01 00:00 (timezone-naive local time).
using Minutes = std::int64_t;
/// Days since 1970-01-01.
using Days = std::int64_t;

inline constexpr Minutes kMinutesPerDay = 1440;

Days parse_date(std::string_view text);           // YYYY-MM-DD
Minutes parse_timestamp(std::string_view text);   // YYYY-MM-DD HH:MM
std::string format_date(Days day);
std::string format_timestamp(Minutes t);
/// 0 = Monday ... 6 = Sunday.
int weekday(Days day);

/// Table-1 travel codes (0 home, 1 travel, 2 work/study, 3 other) to analysis
/// codes (0 other, 1 home, 2 work, 3 trip).
Activity remap_ptype(int raw);
int unmap_ptype(Activity code);

struct ActivityRecord {
  std::string pid;
  Days date = 0;
  Minutes t_start = 0;
  Minutes t_end = 0;
  double longitude = 0.0;
  double latitude = 0.0;
  int ptype = 0;               // raw code as stored in the file
  Activity activity{};         // remapped analysis code

  bool is_trip() const { return activity == Activity::trip; }
  friend bool operator==(const ActivityRecord&, const ActivityRecord&) = default;
};

enum class Gender { male, female, unknown };

struct PersonProfile {
  std::string pid;
  std::optional<int> age_group;
  Gender gender = Gender::unknown;
  std::optional<double> arpu;
  std::string brand;
};

struct RowError {
  std::size_t line = 0;  // 1-based, header is line 1
  std::string message;
};

template <class T>
struct Parsed {
  std::vector<T> rows;
  std::vector<RowError> errors;
};

inline constexpr std::string_view kActivityHeader =
    "pid,date,t_start,t_end,longitude,latitude,ptype";
inline constexpr std::string_view kProfileHeader = "pid,age,gender,arpu,brand";

/// Throws SchemaError naming the first missing column. Bad rows are returned
/// in `errors` with their line number, never silently dropped.
Parsed<ActivityRecord> parse_activity_records(std::string_view text);
Parsed<PersonProfile> parse_profiles(std::string_view text);

std::string write_activity_records(const std::vector<ActivityRecord>& records);
std::string write_profiles(const std::vector<PersonProfile>& profiles);

struct CleaningConfig {
  double max_speed_kmh = 150.0;
  int min_days = 20;
  double home_night_share = 0.6;
  double min_coverage = 0.8;
  int night_start_minute = 0;      // 00:00
  int night_end_minute = 6 * 60;   // 06:00
  /// Night locations are compared after rounding to this many degrees.
  double anchor_resolution_deg = 1e-3;
};

struct CleaningReport {
  std::size_t input_users = 0;
  std::size_t input_records = 0;
  std::size_t duplicates = 0;
  std::size_t overlaps = 0;
  std::size_t speed_trips = 0;
  std::size_t users_few_days = 0;
  std::size_t users_no_anchor = 0;
  std::size_t users_low_coverage = 0;  // filled by the series stage
  std::size_t retained_users = 0;
  std::size_t retained_records = 0;

  std::size_t dropped_users() const {
    return users_few_days + users_no_anchor + users_low_coverage;
  }
  std::string to_json() const;
};

struct CleanResult {
  std::vector<ActivityRecord> records;  // sorted by (pid, t_start)
  std::vector<PersonProfile> profiles;  // sorted by pid, retained users only
  CleaningReport report;
};

/// Great-circle distance in kilometres.
double haversine_km(double lon1, double lat1, double lon2, double lat2);

CleanResult clean(std::vector<ActivityRecord> records,
                  std::vector<PersonProfile> profiles,
                  const CleaningConfig& config);

struct Window {
  Minutes start = 0;
  int days = 28;
  Minutes length() const { return static_cast<Minutes>(days) * kMinutesPerDay; }
};

struct CategorizedSeries {
  std::string pid;
  Minutes start = 0;
  int granularity = 1;  // minutes per bin
  CodeSequence values;
  double coverage = 0.0;
};

/// Each bin takes the code of the record covering its midpoint; uncovered bins
/// carry the previous observed code forward and leading gaps take the first
/// observed code.
CategorizedSeries build_series(const std::string& pid,
                               const std::vector<ActivityRecord>& records,
                               const Window& window, int granularity);

/// Builds one series per pid (ordered by pid). Persons with no record in the
/// window are skipped and listed in `empty`.
struct SeriesSet {
  std::vector<CategorizedSeries> series;
  std::vector<std::string> empty;
};
SeriesSet build_all_series(const std::vector<ActivityRecord>& records,
                           const Window& window, int granularity,
                           unsigned threads = 1);

/// Majority code per block of `factor` bins; ties go trip > work > home > other.
CategorizedSeries resample(const CategorizedSeries& series, int factor);
CodeSequence resample(const CodeSequence& values, int factor);

}  // namespace atpm::ingest
