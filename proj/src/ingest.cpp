#include "atpm/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "json.hpp"

#include "atpm/csv.hpp"

namespace atpm::ingest {

namespace {

// Howard Hinnant's civil-calendar conversions.
Days days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return static_cast<Days>(era) * 146097 + static_cast<Days>(doe) - 719468;
}

void civil_from_days(Days z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const Days era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y = static_cast<int>(yoe) + static_cast<int>(era) * 400 + (m <= 2);
}

template <class T>
bool parse_int(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::string pad2(unsigned v) {
  std::string s = std::to_string(v);
  return s.size() < 2 ? "0" + s : s;
}

/// Column positions for `wanted`, resolved from the header line.
std::vector<std::size_t> resolve_columns(std::string_view header,
                                         std::string_view wanted) {
  auto names = csv::split_line(header);
  for (auto& n : names) n = trim(n);
  if (!names.empty() && names[0].starts_with("\xEF\xBB\xBF")) {
    names[0] = names[0].substr(3);
  }
  std::vector<std::size_t> idx;
  for (const auto& col : csv::split_line(wanted)) {
    auto it = std::find(names.begin(), names.end(), col);
    if (it == names.end()) throw SchemaError("missing column: " + col);
    idx.push_back(static_cast<std::size_t>(it - names.begin()));
  }
  return idx;
}

}  // namespace

Days parse_date(std::string_view text) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
      !parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) ||
      !parse_int(text.substr(8, 2), d) || m < 1 || m > 12 || d < 1 || d > 31) {
    throw InvalidArgument("bad date: '" + std::string(text) + "'");
  }
  const Days days = days_from_civil(y, m, d);
  int y2 = 0;
  unsigned m2 = 0, d2 = 0;
  civil_from_days(days, y2, m2, d2);
  if (m2 != m || d2 != d) {
    throw InvalidArgument("bad date: '" + std::string(text) + "'");
  }
  return days;
}

Minutes parse_timestamp(std::string_view text) {
  unsigned hh = 0, mm = 0;
  if (text.size() != 16 || (text[10] != ' ' && text[10] != 'T') ||
      text[13] != ':' || !parse_int(text.substr(11, 2), hh) ||
      !parse_int(text.substr(14, 2), mm) || mm > 59 || hh > 24 ||
      (hh == 24 && mm != 0)) {
    throw InvalidArgument("bad timestamp: '" + std::string(text) + "'");
  }
  return parse_date(text.substr(0, 10)) * kMinutesPerDay + hh * 60 + mm;
}

std::string format_date(Days day) {
  int y = 0;
  unsigned m = 0, d = 0;
  civil_from_days(day, y, m, d);
  return std::to_string(y) + "-" + pad2(m) + "-" + pad2(d);
}

std::string format_timestamp(Minutes t) {
  Days day = t / kMinutesPerDay;
  Minutes rem = t % kMinutesPerDay;
  if (rem < 0) {
    rem += kMinutesPerDay;
    --day;
  }
  return format_date(day) + " " + pad2(static_cast<unsigned>(rem / 60)) + ":" +
         pad2(static_cast<unsigned>(rem % 60));
}

int weekday(Days day) {
  // 1970-01-01 was a Thursday.
  const Days w = (day + 3) % 7;
  return static_cast<int>(w < 0 ? w + 7 : w);
}

Activity remap_ptype(int raw) {
  switch (raw) {
    case 0: return Activity::home;
    case 1: return Activity::trip;
    case 2: return Activity::work;
    case 3: return Activity::other;
    default:
      throw InvalidArgument("ptype out of range: " + std::to_string(raw));
  }
}

int unmap_ptype(Activity code) {
  switch (code) {
    case Activity::home: return 0;
    case Activity::trip: return 1;
    case Activity::work: return 2;
    case Activity::other: return 3;
  }
  throw InvalidArgument("invalid activity code");
}

Parsed<ActivityRecord> parse_activity_records(std::string_view text) {
  Parsed<ActivityRecord> out;
  const auto all = csv::lines(text);
  if (all.empty()) throw SchemaError("missing header row");
  const auto col = resolve_columns(all[0], kActivityHeader);
  const std::size_t width = *std::max_element(col.begin(), col.end()) + 1;

  for (std::size_t i = 1; i < all.size(); ++i) {
    const std::size_t line = i + 1;
    if (all[i].find_first_not_of(" \t") == std::string_view::npos) continue;
    const auto f = csv::split_line(all[i]);
    if (f.size() < width) {
      out.errors.push_back({line, "expected " + std::to_string(width) +
                                      " fields, got " + std::to_string(f.size())});
      continue;
    }
    try {
      ActivityRecord r;
      r.pid = trim(f[col[0]]);
      if (r.pid.empty()) throw InvalidArgument("empty pid");
      r.date = parse_date(trim(f[col[1]]));
      r.t_start = parse_timestamp(trim(f[col[2]]));
      r.t_end = parse_timestamp(trim(f[col[3]]));
      if (!parse_double(f[col[4]], r.longitude)) {
        throw InvalidArgument("bad longitude: '" + f[col[4]] + "'");
      }
      if (!parse_double(f[col[5]], r.latitude)) {
        throw InvalidArgument("bad latitude: '" + f[col[5]] + "'");
      }
      if (!parse_int(trim(f[col[6]]), r.ptype)) {
        throw InvalidArgument("bad ptype: '" + f[col[6]] + "'");
      }
      r.activity = remap_ptype(r.ptype);
      if (r.t_start >= r.t_end) throw InvalidArgument("t_start must precede t_end");
      if (r.longitude < -180.0 || r.longitude > 180.0) {
        throw InvalidArgument("longitude out of range");
      }
      if (r.latitude < -90.0 || r.latitude > 90.0) {
        throw InvalidArgument("latitude out of range");
      }
      out.rows.push_back(std::move(r));
    } catch (const Error& e) {
      out.errors.push_back({line, e.what()});
    }
  }
  return out;
}

Parsed<PersonProfile> parse_profiles(std::string_view text) {
  Parsed<PersonProfile> out;
  const auto all = csv::lines(text);
  if (all.empty()) throw SchemaError("missing header row");
  const auto col = resolve_columns(all[0], kProfileHeader);
  const std::size_t width = *std::max_element(col.begin(), col.end()) + 1;
  std::set<std::string> seen;

  for (std::size_t i = 1; i < all.size(); ++i) {
    const std::size_t line = i + 1;
    if (all[i].find_first_not_of(" \t") == std::string_view::npos) continue;
    const auto f = csv::split_line(all[i]);
    if (f.size() < width) {
      out.errors.push_back({line, "expected " + std::to_string(width) +
                                      " fields, got " + std::to_string(f.size())});
      continue;
    }
    try {
      PersonProfile p;
      p.pid = trim(f[col[0]]);
      if (p.pid.empty()) throw InvalidArgument("empty pid");
      if (!seen.insert(p.pid).second) throw InvalidArgument("duplicate pid " + p.pid);

      const std::string age = trim(f[col[1]]);
      if (!age.empty()) {
        int a = 0;
        if (!parse_int(age, a)) throw InvalidArgument("bad age group: '" + age + "'");
        p.age_group = a;
      }
      const std::string g = trim(f[col[2]]);
      if (g == "01" || g == "1") {
        p.gender = Gender::male;
      } else if (g == "02" || g == "2") {
        p.gender = Gender::female;
      } else if (g == "03" || g == "3" || g.empty()) {
        p.gender = Gender::unknown;
      } else {
        throw InvalidArgument("bad gender code: '" + g + "'");
      }
      const std::string arpu = trim(f[col[3]]);
      if (!arpu.empty()) {
        double v = 0.0;
        if (!parse_double(arpu, v) || v < 0.0) {
          throw InvalidArgument("bad arpu: '" + arpu + "'");
        }
        p.arpu = v;
      }
      p.brand = trim(f[col[4]]);
      out.rows.push_back(std::move(p));
    } catch (const Error& e) {
      out.errors.push_back({line, e.what()});
    }
  }
  return out;
}

std::string write_activity_records(const std::vector<ActivityRecord>& records) {
  std::string out(kActivityHeader);
  out += '\n';
  for (const auto& r : records) {
    out += csv::escape(r.pid) + ',' + format_date(r.date) + ',' +
           format_timestamp(r.t_start) + ',' + format_timestamp(r.t_end) + ',' +
           csv::format_fixed(r.longitude, 6) + ',' +
           csv::format_fixed(r.latitude, 6) + ',' + std::to_string(r.ptype) + '\n';
  }
  return out;
}

std::string write_profiles(const std::vector<PersonProfile>& profiles) {
  std::string out(kProfileHeader);
  out += '\n';
  for (const auto& p : profiles) {
    out += csv::escape(p.pid) + ',';
    if (p.age_group) out += std::to_string(*p.age_group);
    out += ',';
    out += p.gender == Gender::male ? "01" : p.gender == Gender::female ? "02" : "03";
    out += ',';
    if (p.arpu) out += csv::format_fixed(*p.arpu, 2);
    out += ',' + csv::escape(p.brand) + '\n';
  }
  return out;
}

std::string CleaningReport::to_json() const {
  nlohmann::ordered_json j;
  j["input_users"] = input_users;
  j["input_records"] = input_records;
  j["dropped_records"] = {{"duplicates", duplicates},
                          {"overlaps", overlaps},
                          {"speed_trips", speed_trips}};
  j["dropped_users"] = {{"few_days", users_few_days},
                        {"no_night_anchor", users_no_anchor},
                        {"low_coverage", users_low_coverage}};
  j["retained_users"] = retained_users;
  j["retained_records"] = retained_records;
  return j.dump(2) + "\n";
}

double haversine_km(double lon1, double lat1, double lon2, double lat2) {
  constexpr double kEarthRadiusKm = 6371.0088;
  constexpr double kRad = std::numbers::pi / 180.0;
  const double dlat = (lat2 - lat1) * kRad;
  const double dlon = (lon2 - lon1) * kRad;
  const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1 * kRad) * std::cos(lat2 * kRad) *
                       std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

namespace {

bool record_less(const ActivityRecord& a, const ActivityRecord& b) {
  return std::tie(a.pid, a.t_start, a.t_end, a.ptype, a.date, a.longitude, a.latitude) <
         std::tie(b.pid, b.t_start, b.t_end, b.ptype, b.date, b.longitude, b.latitude);
}

/// Keeps the longer of two overlapping records; earlier start wins ties.
std::vector<ActivityRecord> resolve_overlaps(std::vector<ActivityRecord> person,
                                             std::size_t& dropped) {
  std::vector<ActivityRecord> kept;
  for (auto& r : person) {
    if (!kept.empty() && r.t_start < kept.back().t_end) {
      ++dropped;
      const auto& prev = kept.back();
      if (r.t_end - r.t_start > prev.t_end - prev.t_start) kept.back() = std::move(r);
      continue;
    }
    kept.push_back(std::move(r));
  }
  return kept;
}

std::vector<ActivityRecord> drop_fast_trips(std::vector<ActivityRecord> person,
                                            double max_speed_kmh,
                                            std::size_t& dropped) {
  std::vector<std::size_t> stays;
  for (std::size_t i = 0; i < person.size(); ++i) {
    if (!person[i].is_trip()) stays.push_back(i);
  }
  std::vector<bool> drop(person.size(), false);
  for (std::size_t s = 0; s + 1 < stays.size(); ++s) {
    const auto& a = person[stays[s]];
    const auto& b = person[stays[s + 1]];
    if (stays[s + 1] == stays[s] + 1) continue;  // no trip in between
    const double km = haversine_km(a.longitude, a.latitude, b.longitude, b.latitude);
    const double hours = static_cast<double>(b.t_start - a.t_end) / 60.0;
    const bool too_fast = hours <= 0.0 ? km > 0.0 : km / hours > max_speed_kmh;
    if (!too_fast) continue;
    for (std::size_t i = stays[s] + 1; i < stays[s + 1]; ++i) drop[i] = true;
  }
  std::vector<ActivityRecord> kept;
  for (std::size_t i = 0; i < person.size(); ++i) {
    if (drop[i]) {
      ++dropped;
    } else {
      kept.push_back(std::move(person[i]));
    }
  }
  return kept;
}

bool has_night_anchor(const std::vector<ActivityRecord>& person,
                      const CleaningConfig& config) {
  // night -> (location key -> covered minutes)
  std::map<Days, std::map<std::pair<long long, long long>, Minutes>> nights;
  for (const auto& r : person) {
    if (r.is_trip()) continue;
    const Days first = r.t_start / kMinutesPerDay;
    const Days last = (r.t_end - 1) / kMinutesPerDay;
    for (Days day = first; day <= last; ++day) {
      const Minutes lo = day * kMinutesPerDay + config.night_start_minute;
      const Minutes hi = day * kMinutesPerDay + config.night_end_minute;
      const Minutes overlap = std::min(hi, r.t_end) - std::max(lo, r.t_start);
      if (overlap <= 0) continue;
      const auto key = std::make_pair(
          std::llround(r.longitude / config.anchor_resolution_deg),
          std::llround(r.latitude / config.anchor_resolution_deg));
      nights[day][key] += overlap;
    }
  }
  if (nights.empty()) return false;

  std::map<std::pair<long long, long long>, std::size_t> votes;
  for (const auto& [day, locations] : nights) {
    auto best = std::max_element(
        locations.begin(), locations.end(),
        [](const auto& a, const auto& b) { return a.second < b.second; });
    ++votes[best->first];
  }
  std::size_t top = 0;
  for (const auto& [key, count] : votes) top = std::max(top, count);
  return static_cast<double>(top) >=
         config.home_night_share * static_cast<double>(nights.size());
}

}  // namespace

CleanResult clean(std::vector<ActivityRecord> records,
                  std::vector<PersonProfile> profiles,
                  const CleaningConfig& config) {
  CleanResult result;
  auto& rep = result.report;
  rep.input_records = records.size();

  std::sort(records.begin(), records.end(), record_less);
  {
    std::set<std::string> users;
    for (const auto& r : records) users.insert(r.pid);
    rep.input_users = users.size();
  }

  const auto last = std::unique(records.begin(), records.end());
  rep.duplicates = static_cast<std::size_t>(records.end() - last);
  records.erase(last, records.end());

  std::set<std::string> retained;
  for (auto begin = records.begin(); begin != records.end();) {
    auto end = std::find_if(begin, records.end(),
                            [&](const ActivityRecord& r) { return r.pid != begin->pid; });
    std::vector<ActivityRecord> person(std::make_move_iterator(begin),
                                       std::make_move_iterator(end));
    begin = end;

    person = resolve_overlaps(std::move(person), rep.overlaps);
    person = drop_fast_trips(std::move(person), config.max_speed_kmh, rep.speed_trips);

    std::set<Days> days;
    for (const auto& r : person) days.insert(r.date);
    if (static_cast<int>(days.size()) < config.min_days) {
      ++rep.users_few_days;
      continue;
    }
    if (!has_night_anchor(person, config)) {
      ++rep.users_no_anchor;
      continue;
    }
    retained.insert(person.front().pid);
    for (auto& r : person) result.records.push_back(std::move(r));
  }

  std::sort(profiles.begin(), profiles.end(),
            [](const auto& a, const auto& b) { return a.pid < b.pid; });
  for (auto& p : profiles) {
    if (retained.count(p.pid)) result.profiles.push_back(std::move(p));
  }
  rep.retained_users = retained.size();
  rep.retained_records = result.records.size();
  return result;
}

CategorizedSeries build_series(const std::string& pid,
                               const std::vector<ActivityRecord>& records,
                               const Window& window, int granularity) {
  if (granularity <= 0) throw InvalidArgument("granularity must be positive");
  if (window.days <= 0) throw InvalidArgument("window must span at least one day");
  if (window.length() % granularity != 0) {
    throw InvalidArgument("window length is not a multiple of the granularity");
  }
  const auto bins = static_cast<std::size_t>(window.length() / granularity);

  std::vector<const ActivityRecord*> sorted;
  for (const auto& r : records) {
    if (r.t_end > window.start && r.t_start < window.start + window.length()) {
      sorted.push_back(&r);
    }
  }
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    return std::tie(a->t_start, a->t_end) < std::tie(b->t_start, b->t_end);
  });

  CategorizedSeries s;
  s.pid = pid;
  s.start = window.start;
  s.granularity = granularity;
  s.values.assign(bins, 0);
  std::vector<bool> observed(bins, false);

  // Midpoints are compared in doubled units so odd granularities stay exact.
  std::size_t next = 0;
  std::vector<const ActivityRecord*> active;
  std::size_t covered = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    const Minutes mid2 = 2 * window.start + static_cast<Minutes>(2 * b + 1) * granularity;
    while (next < sorted.size() && 2 * sorted[next]->t_start <= mid2) {
      active.push_back(sorted[next++]);
    }
    std::erase_if(active, [&](const auto* r) { return 2 * r->t_end <= mid2; });
    if (!active.empty()) {
      s.values[b] = static_cast<Code>(active.back()->activity);
      observed[b] = true;
      ++covered;
    }
  }
  if (covered == 0) throw InvalidArgument("empty person: " + pid);

  const auto first = static_cast<std::size_t>(
      std::find(observed.begin(), observed.end(), true) - observed.begin());
  for (std::size_t b = 0; b < first; ++b) s.values[b] = s.values[first];
  for (std::size_t b = first + 1; b < bins; ++b) {
    if (!observed[b]) s.values[b] = s.values[b - 1];
  }
  s.coverage = static_cast<double>(covered) / static_cast<double>(bins);
  return s;
}

SeriesSet build_all_series(const std::vector<ActivityRecord>& records,
                           const Window& window, int granularity,
                           unsigned threads) {
  std::map<std::string, std::vector<ActivityRecord>> by_pid;
  for (const auto& r : records) by_pid[r.pid].push_back(r);

  std::vector<const std::string*> pids;
  std::vector<const std::vector<ActivityRecord>*> groups;
  for (const auto& [pid, recs] : by_pid) {
    pids.push_back(&pid);
    groups.push_back(&recs);
  }
  std::vector<std::optional<CategorizedSeries>> built(pids.size());
  parallel_for(pids.size(), threads, [&](std::size_t i) {
    try {
      built[i] = build_series(*pids[i], *groups[i], window, granularity);
    } catch (const InvalidArgument& e) {
      if (!std::string_view(e.what()).starts_with("empty person")) throw;
    }
  });

  SeriesSet out;
  for (std::size_t i = 0; i < pids.size(); ++i) {
    if (built[i]) {
      out.series.push_back(std::move(*built[i]));
    } else {
      out.empty.push_back(*pids[i]);
    }
  }
  return out;
}

CodeSequence resample(const CodeSequence& values, int factor) {
  if (factor <= 0) throw InvalidArgument("resample factor must be positive");
  if (values.size() % static_cast<std::size_t>(factor) != 0) {
    throw InvalidArgument("resample factor " + std::to_string(factor) +
                          " does not divide series length " +
                          std::to_string(values.size()));
  }
  // Priority order for ties: trip, work, home, other.
  constexpr std::array<Code, kActivityCount> kPriority = {3, 2, 1, 0};
  CodeSequence out(values.size() / static_cast<std::size_t>(factor));
  for (std::size_t o = 0; o < out.size(); ++o) {
    std::array<int, 256> counts{};
    for (int k = 0; k < factor; ++k) ++counts[values[o * factor + k]];
    int best_count = -1;
    Code best = 0;
    for (Code c : kPriority) {
      if (counts[c] > best_count) {
        best_count = counts[c];
        best = c;
      }
    }
    // codes outside the analysis alphabet only win by strict majority
    for (int c = kActivityCount; c < 256; ++c) {
      if (counts[c] > best_count) {
        best_count = counts[c];
        best = static_cast<Code>(c);
      }
    }
    out[o] = best;
  }
  return out;
}

CategorizedSeries resample(const CategorizedSeries& series, int factor) {
  CategorizedSeries out = series;
  out.values = resample(series.values, factor);
  out.granularity = series.granularity * factor;
  return out;
}

}  // namespace atpm::ingest
