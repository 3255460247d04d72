#include "atpm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "atpm/csv.hpp"

namespace atpm::synth {

namespace {

// Generator helpers built on raw 64-bit draws so output does not depend on
// the standard library's distribution implementations.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  std::uint64_t below(std::uint64_t n) { return next() % n; }

 private:
  std::uint64_t state_;
};

constexpr int kDay = 1440;

void validate_template(const std::vector<ScheduleBlock>& blocks, const std::string& what) {
  if (blocks.empty()) throw InvalidArgument(what + ": empty schedule");
  double at = 0.0;
  for (const auto& b : blocks) {
    if (b.start_hour != at) throw InvalidArgument(what + ": blocks must tile 24h without gaps or overlap");
    if (!(b.end_hour > b.start_hour)) throw InvalidArgument(what + ": empty or reversed block");
    if (static_cast<int>(b.activity) >= kActivityCount) throw InvalidArgument(what + ": bad activity code");
    at = b.end_hour;
  }
  if (at != 24.0) throw InvalidArgument(what + ": schedule must end at 24h");
}

/// Minute-resolution codes for one day.
std::vector<Code> render_day(const std::vector<ScheduleBlock>& blocks, double person_shift,
                             double jitter, int trip_minutes, Stream& rng) {
  std::vector<int> cuts;
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    double t = blocks[i].start_hour * 60.0 + person_shift + 0.5 * jitter * rng.normal();
    cuts.push_back(static_cast<int>(std::lround(t)));
  }
  int prev = 0;
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    const int room = static_cast<int>(cuts.size() - i);  // later cuts need space too
    cuts[i] = std::clamp(cuts[i], prev + 1, kDay - room);
    prev = cuts[i];
  }

  std::vector<Code> day(kDay);
  int begin = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const int end = i < cuts.size() ? cuts[i] : kDay;
    std::fill(day.begin() + begin, day.begin() + end, static_cast<Code>(blocks[i].activity));
    begin = end;
  }
  if (trip_minutes > 0) {
    const auto trip = static_cast<Code>(Activity::trip);
    for (std::size_t i = 0; i < cuts.size(); ++i) {
      const Code before = static_cast<Code>(blocks[i].activity);
      const Code after = static_cast<Code>(blocks[i + 1].activity);
      if (before == after || before == trip || after == trip) continue;
      const int lo = std::max(0, cuts[i] - trip_minutes / 2);
      const int hi = std::min(kDay, lo + trip_minutes);
      std::fill(day.begin() + lo, day.begin() + hi, trip);
    }
  }
  return day;
}

struct Site {
  double lon = 0.0;
  double lat = 0.0;
};

Site offset(const Site& origin, double km, double bearing) {
  constexpr double kKmPerDegLat = 110.574;
  const double km_per_deg_lon = 111.320 * std::cos(origin.lat * std::numbers::pi / 180.0);
  return {origin.lon + km * std::sin(bearing) / km_per_deg_lon,
          origin.lat + km * std::cos(bearing) / kKmPerDegLat};
}

std::string person_id(std::size_t index) {
  std::string digits = std::to_string(index);
  return "p" + std::string(digits.size() < 5 ? 5 - digits.size() : 0, '0') + digits;
}

}  // namespace

void ArchetypeSpec::validate() const {
  validate_template(weekday, name + " weekday");
  validate_template(weekend, name + " weekend");
  if (!(flip_prob >= 0.0 && flip_prob < 0.5)) throw InvalidArgument(name + ": flip_prob must lie in [0, 0.5)");
  if (!(jitter_minutes >= 0.0)) throw InvalidArgument(name + ": jitter must be non-negative");
  if (trip_minutes < 0) throw InvalidArgument(name + ": trip_minutes must be non-negative");
}

std::vector<ArchetypeSpec> default_archetypes(double flip_prob, double jitter_minutes) {
  using A = Activity;
  std::vector<ArchetypeSpec> specs = {
      {"multitasking",
       {{0, 7.5, A::home}, {7.5, 8.5, A::other}, {8.5, 12, A::work}, {12, 13.5, A::other},
        {13.5, 17.5, A::work}, {17.5, 20.5, A::other}, {20.5, 24, A::home}},
       {{0, 9, A::home}, {9, 12, A::other}, {12, 14, A::home}, {14, 18, A::other},
        {18, 24, A::home}}},
      {"work-dominant",
       {{0, 7.5, A::home}, {7.5, 18.5, A::work}, {18.5, 24, A::home}},
       {{0, 10, A::home}, {10, 13, A::other}, {13, 24, A::home}}},
      {"balanced",
       {{0, 9, A::home}, {9, 14, A::work}, {14, 19, A::other}, {19, 24, A::home}},
       {{0, 10, A::home}, {10, 20, A::other}, {20, 24, A::home}}},
      {"reverse-rhythm",
       {{0, 11, A::home}, {11, 12, A::other}, {12, 24, A::home}},
       {{0, 8, A::home}, {8, 12, A::work}, {12, 20, A::other}, {20, 24, A::home}}},
      {"home-dominant",
       {{0, 24, A::home}},
       {{0, 15, A::home}, {15, 17, A::other}, {17, 24, A::home}}},
  };
  for (auto& s : specs) {
    s.flip_prob = flip_prob;
    s.jitter_minutes = jitter_minutes;
  }
  return specs;
}

ingest::Minutes default_start() {
  return ingest::parse_timestamp("2019-08-05 00:00");
}

std::vector<double> template_shares(const ArchetypeSpec& spec) {
  Stream unused(0);
  std::vector<double> shares(kActivityCount, 0.0);
  for (int d = 0; d < 7; ++d) {
    const auto& blocks = d < 5 ? spec.weekday : spec.weekend;
    for (Code c : render_day(blocks, 0.0, 0.0, spec.trip_minutes, unused)) shares[c] += 1.0;
  }
  for (double& s : shares) s /= 7.0 * kDay;
  return shares;
}

Population generate_population(const std::vector<ArchetypeSpec>& specs,
                               const PopulationConfig& config) {
  if (specs.empty()) throw InvalidArgument("generate_population: no archetypes");
  for (const auto& s : specs) s.validate();
  if (config.per_spec_count < 1) throw InvalidArgument("generate_population: per_spec_count must be >= 1");
  if (config.days < 1) throw InvalidArgument("generate_population: days must be >= 1");
  if (config.granularity < 1 || kDay % config.granularity != 0) {
    throw InvalidArgument("generate_population: granularity must divide 1440");
  }

  const ingest::Minutes start = config.start != 0 ? config.start : default_start();
  const ingest::Days first_day = start / kDay;
  const std::size_t bins_per_day = static_cast<std::size_t>(kDay / config.granularity);
  const Site city{114.20, 22.60};
  static const char* kBrands[] = {"Apple", "Huawei", "Xiaomi", "Oppo", "Vivo"};

  Population pop;
  std::size_t index = 0;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const auto& spec = specs[s];
    for (int p = 0; p < config.per_spec_count; ++p, ++index) {
      Stream rng(mix_seed(config.seed, index));
      const std::string pid = person_id(index);
      const double shift = spec.jitter_minutes * rng.normal();

      ingest::CategorizedSeries series;
      series.pid = pid;
      series.start = start;
      series.granularity = config.granularity;
      series.coverage = 1.0;
      series.values.reserve(bins_per_day * static_cast<std::size_t>(config.days));
      for (int d = 0; d < config.days; ++d) {
        const bool weekend = ingest::weekday(first_day + d) >= 5;
        const auto minutes = render_day(weekend ? spec.weekend : spec.weekday, shift,
                                        spec.jitter_minutes, spec.trip_minutes, rng);
        for (std::size_t b = 0; b < bins_per_day; ++b) {
          const std::size_t mid = b * static_cast<std::size_t>(config.granularity) +
                                  static_cast<std::size_t>(config.granularity) / 2;
          series.values.push_back(minutes[mid]);
        }
      }
      for (Code& c : series.values) {
        if (rng.uniform() < spec.flip_prob) {
          c = static_cast<Code>((c + 1 + rng.below(kActivityCount - 1)) % kActivityCount);
        }
      }

      // Stays at person-specific sites within ~12 km of home.
      const Site home = offset(city, 8.0 * rng.uniform(), 2.0 * std::numbers::pi * rng.uniform());
      const Site work = offset(home, 3.0 + 6.0 * rng.uniform(), 2.0 * std::numbers::pi * rng.uniform());
      const Site leisure = offset(home, 1.0 + 4.0 * rng.uniform(), 2.0 * std::numbers::pi * rng.uniform());
      Site last = home;
      for (std::size_t b = 0; b < series.values.size();) {
        std::size_t e = b;
        while (e < series.values.size() && series.values[e] == series.values[b]) ++e;
        ingest::ActivityRecord r;
        r.pid = pid;
        r.t_start = start + static_cast<ingest::Minutes>(b) * config.granularity;
        r.t_end = start + static_cast<ingest::Minutes>(e) * config.granularity;
        r.date = r.t_start / kDay;
        r.activity = static_cast<Activity>(series.values[b]);
        r.ptype = ingest::unmap_ptype(r.activity);
        Site at = last;
        switch (r.activity) {
          case Activity::home: at = home; break;
          case Activity::work: at = work; break;
          case Activity::other: at = leisure; break;
          case Activity::trip: break;
        }
        if (r.activity != Activity::trip) last = at;
        r.longitude = std::round(at.lon * 1e6) / 1e6;
        r.latitude = std::round(at.lat * 1e6) / 1e6;
        pop.records.push_back(std::move(r));
        b = e;
      }

      ingest::PersonProfile profile;
      profile.pid = pid;
      profile.age_group = 3 + static_cast<int>(rng.below(13));
      profile.gender = rng.uniform() < 0.7 ? ingest::Gender::male : ingest::Gender::female;
      profile.arpu = std::round((30.0 + 150.0 * rng.uniform() * rng.uniform()) * 100.0) / 100.0;
      profile.brand = kBrands[rng.below(std::size(kBrands))];
      pop.profiles.push_back(std::move(profile));

      pop.series.push_back(std::move(series));
      pop.labels.push_back(static_cast<int>(s));
    }
  }
  return pop;
}

std::string write_truth(const Population& population) {
  std::string out = "pid,label\n";
  for (std::size_t i = 0; i < population.series.size(); ++i) {
    out += csv::escape(population.series[i].pid) + ',' + std::to_string(population.labels[i]) + '\n';
  }
  return out;
}

}  // namespace atpm::synth
