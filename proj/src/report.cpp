#include "atpm/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <tuple>

#include "atpm/csv.hpp"

namespace atpm::report {

std::size_t ShareTable::total(int cell) const {
  std::size_t t = 0;
  for (auto c : counts[static_cast<std::size_t>(cell)]) t += c;
  return t;
}

double ShareTable::share(int cell, int code) const {
  const std::size_t t = total(cell);
  if (t == 0) return 0.0;
  return static_cast<double>(counts[static_cast<std::size_t>(cell)][static_cast<std::size_t>(code)]) /
         static_cast<double>(t);
}

namespace {

int week_cell(ingest::Minutes t) {
  ingest::Days day = t / ingest::kMinutesPerDay;
  ingest::Minutes rem = t % ingest::kMinutesPerDay;
  if (rem < 0) {
    rem += ingest::kMinutesPerDay;
    --day;
  }
  return ingest::weekday(day) * 24 + static_cast<int>(rem / 60);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

ShareTable activity_shares(const std::vector<const ingest::CategorizedSeries*>& members) {
  if (members.empty()) throw InvalidArgument("activity_shares: empty cluster");
  ShareTable table;
  for (const auto* s : members) {
    for (std::size_t b = 0; b < s->values.size(); ++b) {
      const Code c = s->values[b];
      if (c >= kActivityCount) throw InvalidArgument("activity_shares: code out of range");
      const int cell = week_cell(s->start + static_cast<ingest::Minutes>(b) * s->granularity);
      ++table.counts[static_cast<std::size_t>(cell)][c];
    }
  }
  return table;
}

double waking_work_share(const ingest::CategorizedSeries& series,
                         const DemographicsConfig& config) {
  std::size_t waking = 0, work = 0;
  for (std::size_t b = 0; b < series.values.size(); ++b) {
    const int hour = week_cell(series.start + static_cast<ingest::Minutes>(b) * series.granularity) % 24;
    if (hour < config.waking_start_hour || hour >= config.waking_end_hour) continue;
    ++waking;
    if (series.values[b] == static_cast<Code>(Activity::work)) ++work;
  }
  return waking == 0 ? 0.0 : static_cast<double>(work) / static_cast<double>(waking);
}

DemographicsTable demographics_table(const std::vector<int>& labels,
                                     const std::vector<std::string>& pids,
                                     const std::vector<ingest::PersonProfile>& profiles,
                                     const std::vector<ingest::CategorizedSeries>& series,
                                     const DemographicsConfig& config) {
  if (labels.size() != pids.size()) throw InvalidArgument("demographics_table: label/pid count mismatch");
  if (!series.empty() && series.size() != pids.size()) {
    throw InvalidArgument("demographics_table: series/pid count mismatch");
  }
  std::map<std::string, const ingest::PersonProfile*> by_pid;
  for (const auto& p : profiles) by_pid[p.pid] = &p;

  DemographicsTable table;
  for (int l : labels) table.k = std::max(table.k, l + 1);
  const auto k = static_cast<std::size_t>(table.k);
  table.sizes.assign(k, 0);
  for (int l : labels) ++table.sizes[static_cast<std::size_t>(l)];

  // variable -> category -> per-cluster counts; "" category means unknown
  using Counts = std::map<std::string, std::vector<std::size_t>>;
  std::vector<std::pair<std::string, Counts>> vars = {
      {"Gender", {}}, {"Age", {}}, {"Employment", {}}, {"Mobile Brand", {}}};
  auto tally = [&](std::size_t var, const std::string& category, std::size_t cluster) {
    auto& v = vars[var].second[category];
    if (v.empty()) v.assign(k, 0);
    ++v[cluster];
  };
  std::vector<std::vector<double>> arpu(k);

  for (std::size_t i = 0; i < pids.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    auto it = by_pid.find(pids[i]);
    const ingest::PersonProfile* p = it == by_pid.end() ? nullptr : it->second;

    std::string gender;
    if (p && p->gender == ingest::Gender::male) gender = "Male";
    if (p && p->gender == ingest::Gender::female) gender = "Female";
    tally(0, gender, c);

    std::string age;
    if (p && p->age_group) {
      // zero-padded so categories sort numerically
      std::string code = std::to_string(*p->age_group);
      age = std::string(code.size() < 2 ? 2 - code.size() : 0, '0') + code;
    }
    tally(1, age, c);

    std::string employed;
    if (!series.empty()) {
      employed = waking_work_share(series[i], config) > config.employment_threshold ? "Employed"
                                                                                    : "Not employed";
    }
    tally(2, employed, c);

    std::string brand;
    if (p && !p->brand.empty()) {
      brand = "Others";
      for (const auto& b : config.brands) {
        if (lower(b) == lower(p->brand)) brand = b;
      }
    }
    tally(3, brand, c);

    if (p && p->arpu) arpu[c].push_back(*p->arpu);
  }

  for (const auto& [variable, counts] : vars) {
    std::vector<std::size_t> known(k, 0);
    std::size_t known_all = 0;
    for (const auto& [category, v] : counts) {
      if (category.empty()) continue;
      for (std::size_t c = 0; c < k; ++c) known[c] += v[c];
    }
    for (auto kn : known) known_all += kn;

    std::vector<std::string> order;
    for (const auto& [category, v] : counts) {
      if (!category.empty()) order.push_back(category);
    }
    if (variable == "Mobile Brand") {
      // configured brands first, then Others
      std::vector<std::string> ranked;
      for (const auto& b : config.brands) {
        if (counts.count(b)) ranked.push_back(b);
      }
      if (counts.count("Others")) ranked.push_back("Others");
      order = ranked;
    }
    for (const auto& category : order) {
      const auto& v = counts.at(category);
      DemographicsRow row{variable, category, std::vector<double>(k, 0.0), 0.0};
      std::size_t all = 0;
      for (std::size_t c = 0; c < k; ++c) {
        all += v[c];
        if (known[c] > 0) row.clusters[c] = 100.0 * static_cast<double>(v[c]) / static_cast<double>(known[c]);
      }
      if (known_all > 0) row.overall = 100.0 * static_cast<double>(all) / static_cast<double>(known_all);
      table.rows.push_back(std::move(row));
    }
    DemographicsRow unknown{variable, "unknown", std::vector<double>(k, 0.0), 0.0};
    if (auto u = counts.find(""); u != counts.end()) {
      for (std::size_t c = 0; c < k; ++c) {
        unknown.clusters[c] = static_cast<double>(u->second[c]);
        unknown.overall += static_cast<double>(u->second[c]);
      }
    }
    table.unknown_counts.push_back(std::move(unknown));
  }

  auto stats = [](const std::vector<double>& v) {
    if (v.empty()) return std::make_pair(0.0, 0.0);
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    return std::make_pair(mean, sd);
  };
  DemographicsRow mean_row{"Monthly Communication Fees", "Mean", std::vector<double>(k), 0.0};
  DemographicsRow sd_row{"Monthly Communication Fees", "Std Dev", std::vector<double>(k), 0.0};
  std::vector<double> all;
  for (std::size_t c = 0; c < k; ++c) {
    std::tie(mean_row.clusters[c], sd_row.clusters[c]) = stats(arpu[c]);
    all.insert(all.end(), arpu[c].begin(), arpu[c].end());
  }
  std::tie(mean_row.overall, sd_row.overall) = stats(all);
  table.arpu = {mean_row, sd_row};
  return table;
}

std::string DemographicsTable::to_csv() const {
  std::string out = "variable,category,overall";
  for (int c = 0; c < k; ++c) out += ",c" + std::to_string(c);
  out += '\n';
  auto emit = [&](const DemographicsRow& r, int digits) {
    out += csv::escape(r.variable) + ',' + csv::escape(r.category) + ',' +
           csv::format_fixed(r.overall, digits);
    for (double v : r.clusters) out += ',' + csv::format_fixed(v, digits);
    out += '\n';
  };
  DemographicsRow size_row{"Size", "N", {}, 0.0};
  for (auto s : sizes) {
    size_row.clusters.push_back(static_cast<double>(s));
    size_row.overall += static_cast<double>(s);
  }
  emit(size_row, 0);
  for (const auto& r : rows) emit(r, 1);
  for (const auto& r : unknown_counts) emit(r, 0);
  for (const auto& r : arpu) emit(r, 1);
  return out;
}

std::string shares_csv(const std::vector<ClusterProfile>& profiles) {
  std::string out = "cluster,weekday,hour,code,share\n";
  for (const auto& p : profiles) {
    for (int cell = 0; cell < kWeekHours; ++cell) {
      if (p.shares.total(cell) == 0) continue;
      for (int code = 0; code < kActivityCount; ++code) {
        out += std::to_string(p.cluster) + ',' + std::to_string(cell / 24) + ',' +
               std::to_string(cell % 24) + ',' + std::to_string(code) + ',' +
               csv::format_fixed(p.shares.share(cell, code), 6) + '\n';
      }
    }
  }
  return out;
}

std::string clusters_csv(const std::vector<ClusterProfile>& profiles) {
  std::string out = "cluster,size,representative_pid\n";
  for (const auto& p : profiles) {
    out += std::to_string(p.cluster) + ',' + std::to_string(p.size) + ',' +
           csv::escape(p.representative_pid) + '\n';
  }
  return out;
}

std::string representatives_csv(const std::vector<ClusterProfile>& profiles,
                                 const std::vector<ingest::CategorizedSeries>& series) {
  std::string out = "cluster,pid,sequence\n";
  for (const auto& p : profiles) {
    auto it = std::find_if(series.begin(), series.end(),
                           [&](const auto& s) { return s.pid == p.representative_pid; });
    if (it == series.end()) continue;
    std::string seq;
    seq.reserve(it->values.size());
    for (Code c : it->values) seq.push_back(static_cast<char>('0' + c));
    out += std::to_string(p.cluster) + ',' + csv::escape(p.representative_pid) + ',' + seq + '\n';
  }
  return out;
}

}  // namespace atpm::report
