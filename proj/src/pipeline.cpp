#include "atpm/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>

#include "atpm/csv.hpp"
#include "atpm/synth.hpp"
#include "atpm/walsh.hpp"

namespace atpm::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <class T>
void read_opt(const json& j, const char* key, T& target) {
  if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<T>();
}

template <class T>
void read_nullable(const json& j, const char* key, std::optional<T>& target) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    target.reset();
  } else {
    target = j.at(key).get<T>();
  }
}

template <class T>
ordered_json nullable(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::string walsh_mode_name(WalshMode m) { return m == WalshMode::integer ? "integer" : "one_hot"; }

WalshMode parse_walsh_mode(const std::string& s) {
  if (s == "integer") return WalshMode::integer;
  if (s == "one_hot" || s == "one-hot") return WalshMode::one_hot;
  throw ConfigError("unknown walsh_mode '" + s + "' (expected integer or one_hot)");
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

std::string RunConfig::activities_file() const {
  return activities_path.empty() ? (fs::path(output_dir) / "activities.csv").string() : activities_path;
}

std::string RunConfig::profiles_file() const {
  if (!profiles_path.empty()) return profiles_path;
  const auto fallback = fs::path(output_dir) / "profiles.csv";
  return fs::exists(fallback) ? fallback.string() : std::string();
}

void RunConfig::validate(bool check_paths) const {
  ingest::Minutes start = 0;
  try {
    start = ingest::parse_timestamp(window_start);
  } catch (const Error& e) {
    throw ConfigError(std::string("window.start: ") + e.what());
  }
  (void)start;
  require(window_days >= 1, "window.days must be >= 1");
  require(granularity >= 1, "granularity must be >= 1");
  require(static_cast<long long>(window_days) * ingest::kMinutesPerDay % granularity == 0,
          "granularity must divide the window length");
  const long long bins = static_cast<long long>(window_days) * ingest::kMinutesPerDay / granularity;
  require(resample_factor >= 1, "resample_factor must be >= 1");
  require(bins % resample_factor == 0, "resample_factor must divide the series length");
  require(bins >= 2, "series must have at least 2 bins");

  require(cleaning.max_speed_kmh > 0.0, "cleaning.max_speed_kmh must be > 0");
  require(cleaning.min_days >= 0, "cleaning.min_days must be >= 0");
  require(cleaning.home_night_share >= 0.0 && cleaning.home_night_share <= 1.0,
          "cleaning.home_night_share must lie in [0, 1]");
  require(cleaning.min_coverage >= 0.0 && cleaning.min_coverage <= 1.0,
          "cleaning.min_coverage must lie in [0, 1]");
  require(k_levels >= 1, "landscape.k_levels must be >= 1");
  require(grid_size >= 2, "landscape.grid_size must be >= 2");
  try {
    geometry.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  require(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
  require(ap.damping >= 0.5 && ap.damping < 1.0, "ap.damping must lie in [0.5, 1)");
  require(ap.max_iter >= 1, "ap.max_iter must be >= 1");
  require(ap.convergence_window >= 1, "ap.convergence_window must be >= 1");
  require(!min_cluster_size || *min_cluster_size >= 1, "min_cluster_size must be >= 1");
  require(k_min >= 1 && k_max >= k_min, "k_scan must satisfy 1 <= k_min <= k_max");
  require(harness_restarts >= 1, "harness.restarts must be >= 1");
  require(harness_dims >= 1, "harness.dims must be >= 1");
  require(mds_dims >= 1, "mds_dims must be >= 1");
  require(threads >= 1, "threads must be >= 1");
  require(demographics.employment_threshold >= 0.0 && demographics.employment_threshold <= 1.0,
          "demographics.employment_threshold must lie in [0, 1]");
  require(synth.per_spec_count >= 1 && synth.days >= 1, "synth sizes must be positive");
  require(synth.flip_prob >= 0.0 && synth.flip_prob < 0.5, "synth.flip_prob must lie in [0, 0.5)");

  if (check_paths) {
    // empty paths point at synth output that may not exist yet
    require(activities_path.empty() || fs::exists(activities_path),
            "input file not found: " + activities_path);
    require(profiles_path.empty() || fs::exists(profiles_path),
            "input file not found: " + profiles_path);
    require(truth_path.empty() || fs::exists(truth_path), "input file not found: " + truth_path);
  }
}

ordered_json RunConfig::to_json() const {
  ordered_json j;
  j["input"] = {{"activities", activities_path}, {"profiles", profiles_path}, {"truth", truth_path}};
  j["output_dir"] = output_dir;
  j["window"] = {{"start", window_start}, {"days", window_days}};
  j["granularity"] = granularity;
  j["resample_factor"] = resample_factor;
  j["cleaning"] = {{"max_speed_kmh", cleaning.max_speed_kmh},
                   {"min_days", cleaning.min_days},
                   {"home_night_share", cleaning.home_night_share},
                   {"min_coverage", cleaning.min_coverage}};
  j["walsh_mode"] = walsh_mode_name(walsh_mode);
  j["landscape"] = {{"k_levels", k_levels}, {"grid_size", grid_size}};
  j["geometry"] = {{"d", geometry.indel},
                   {"Y", nullable(geometry.agenda)},
                   {"w1", geometry.w_edit},
                   {"w2", geometry.w_agenda}};
  j["gamma"] = gamma;
  j["ap"] = {{"damping", ap.damping},
             {"max_iter", ap.max_iter},
             {"convergence_window", ap.convergence_window},
             {"preference", ap.preference ? ordered_json(*ap.preference)
                                          : ordered_json(cluster::to_string(ap.policy))},
             {"tie_noise", ap.tie_noise}};
  j["refine_mode"] = cluster::to_string(refine_mode);
  j["min_cluster_size"] = nullable(min_cluster_size);
  j["k_scan"] = {k_min, k_max};
  j["harness"] = {{"restarts", harness_restarts}, {"dims", harness_dims}};
  j["mds_dims"] = mds_dims;
  j["demographics"] = {{"employment_threshold", demographics.employment_threshold},
                       {"waking_start_hour", demographics.waking_start_hour},
                       {"waking_end_hour", demographics.waking_end_hour},
                       {"brands", demographics.brands}};
  j["synth"] = {{"per_spec_count", synth.per_spec_count},
                {"days", synth.days},
                {"flip_prob", synth.flip_prob},
                {"jitter_minutes", synth.jitter_minutes}};
  j["seed"] = seed;
  j["threads"] = threads;
  j["diagnostics"] = diagnostics;
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  try {
    if (j.contains("input")) {
      const auto& in = j.at("input");
      read_opt(in, "activities", c.activities_path);
      read_opt(in, "profiles", c.profiles_path);
      read_opt(in, "truth", c.truth_path);
    }
    read_opt(j, "output_dir", c.output_dir);
    if (j.contains("window")) {
      read_opt(j.at("window"), "start", c.window_start);
      read_opt(j.at("window"), "days", c.window_days);
    }
    read_opt(j, "granularity", c.granularity);
    read_opt(j, "resample_factor", c.resample_factor);
    if (j.contains("cleaning")) {
      const auto& cl = j.at("cleaning");
      read_opt(cl, "max_speed_kmh", c.cleaning.max_speed_kmh);
      read_opt(cl, "min_days", c.cleaning.min_days);
      read_opt(cl, "home_night_share", c.cleaning.home_night_share);
      read_opt(cl, "min_coverage", c.cleaning.min_coverage);
    }
    if (j.contains("walsh_mode")) c.walsh_mode = parse_walsh_mode(j.at("walsh_mode").get<std::string>());
    if (j.contains("landscape")) {
      read_opt(j.at("landscape"), "k_levels", c.k_levels);
      read_opt(j.at("landscape"), "grid_size", c.grid_size);
    }
    if (j.contains("geometry")) {
      const auto& g = j.at("geometry");
      read_opt(g, "d", c.geometry.indel);
      read_nullable(g, "Y", c.geometry.agenda);
      read_opt(g, "w1", c.geometry.w_edit);
      read_opt(g, "w2", c.geometry.w_agenda);
    }
    read_opt(j, "gamma", c.gamma);
    if (j.contains("ap")) {
      const auto& a = j.at("ap");
      read_opt(a, "damping", c.ap.damping);
      read_opt(a, "max_iter", c.ap.max_iter);
      read_opt(a, "convergence_window", c.ap.convergence_window);
      if (a.contains("preference")) {
        const auto& pref = a.at("preference");
        if (pref.is_string()) {
          c.ap.policy = cluster::parse_preference_policy(pref.get<std::string>());
        } else if (!pref.is_null()) {
          c.ap.preference = pref.get<double>();
        }
      }
      read_opt(a, "tie_noise", c.ap.tie_noise);
    }
    if (j.contains("refine_mode")) {
      c.refine_mode = cluster::parse_refine_mode(j.at("refine_mode").get<std::string>());
    }
    read_nullable(j, "min_cluster_size", c.min_cluster_size);
    if (j.contains("k_scan")) {
      const auto& ks = j.at("k_scan");
      if (!ks.is_array() || ks.size() != 2) throw ConfigError("k_scan must be [k_min, k_max]");
      c.k_min = ks[0].get<int>();
      c.k_max = ks[1].get<int>();
    }
    if (j.contains("harness")) {
      read_opt(j.at("harness"), "restarts", c.harness_restarts);
      read_opt(j.at("harness"), "dims", c.harness_dims);
    }
    read_opt(j, "mds_dims", c.mds_dims);
    if (j.contains("demographics")) {
      const auto& d = j.at("demographics");
      read_opt(d, "employment_threshold", c.demographics.employment_threshold);
      read_opt(d, "waking_start_hour", c.demographics.waking_start_hour);
      read_opt(d, "waking_end_hour", c.demographics.waking_end_hour);
      read_opt(d, "brands", c.demographics.brands);
    }
    if (j.contains("synth")) {
      const auto& s = j.at("synth");
      read_opt(s, "per_spec_count", c.synth.per_spec_count);
      read_opt(s, "days", c.synth.days);
      read_opt(s, "flip_prob", c.synth.flip_prob);
      read_opt(s, "jitter_minutes", c.synth.jitter_minutes);
    }
    read_opt(j, "seed", c.seed);
    read_opt(j, "threads", c.threads);
    read_opt(j, "diagnostics", c.diagnostics);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.ap.seed = c.seed;
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path);
  json j;
  try {
    j = json::parse(csv::read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return from_json(j);
}

TopologicalFeatures topological_features(const std::vector<ingest::CategorizedSeries>& series,
                                         WalshMode mode, std::size_t k_levels,
                                         std::size_t grid_size, unsigned threads) {
  TopologicalFeatures out;
  const std::size_t n = series.size();
  out.diagrams.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    std::vector<walsh::WalshSpectrum> spectra;
    if (mode == WalshMode::integer) {
      spectra.push_back(walsh::transform_codes(series[i].values));
    } else {
      spectra = walsh::transform_one_hot(series[i].values);
    }
    for (const auto& s : spectra) {
      const auto profile = topology::spectrum_profile(s);
      out.diagrams[i].push_back(topology::sublevel_persistence(profile));
    }
  });

  std::vector<topology::PersistenceDiagram> all;
  for (const auto& person : out.diagrams) all.insert(all.end(), person.begin(), person.end());
  out.grid = topology::shared_grid(all, grid_size);

  out.vectors.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    for (const auto& d : out.diagrams[i]) {
      const auto v = topology::landscape_vector(topology::landscape(d, k_levels, out.grid));
      out.vectors[i].insert(out.vectors[i].end(), v.begin(), v.end());
    }
  });
  return out;
}

DistanceMatrix topological_distance_matrix(const TopologicalFeatures& features,
                                           std::vector<std::string> ids, unsigned threads) {
  const auto euclid = cluster::euclidean_distances(features.vectors, threads);
  const double scale = std::sqrt(features.grid.step());
  DistanceMatrix m(euclid.size(), std::move(ids));
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = i + 1; j < m.size(); ++j) m.set(i, j, euclid(i, j) * scale);
  }
  return m;
}

std::string write_series(const std::vector<ingest::CategorizedSeries>& series) {
  std::string out = "pid,start,granularity,coverage,sequence\n";
  for (const auto& s : series) {
    std::string seq;
    seq.reserve(s.values.size());
    for (Code c : s.values) seq.push_back(static_cast<char>('0' + c));
    out += csv::escape(s.pid) + ',' + ingest::format_timestamp(s.start) + ',' +
           std::to_string(s.granularity) + ',' + csv::format_fixed(s.coverage, 6) + ',' + seq + '\n';
  }
  return out;
}

std::vector<ingest::CategorizedSeries> read_series(const std::string& text) {
  const auto lines = csv::lines(text);
  if (lines.empty() || lines[0] != "pid,start,granularity,coverage,sequence") {
    throw SchemaError("series file: unexpected header");
  }
  std::vector<ingest::CategorizedSeries> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = csv::split_line(lines[i]);
    if (f.size() != 5) throw SchemaError("series file line " + std::to_string(i + 1) + ": expected 5 fields");
    ingest::CategorizedSeries s;
    s.pid = f[0];
    s.start = ingest::parse_timestamp(f[1]);
    s.granularity = std::stoi(f[2]);
    s.coverage = std::stod(f[3]);
    for (char ch : f[4]) {
      if (ch < '0' || ch > '3') throw SchemaError("series file line " + std::to_string(i + 1) + ": bad code");
      s.values.push_back(static_cast<Code>(ch - '0'));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string write_assignments(const std::vector<std::string>& pids, const std::vector<int>& labels) {
  std::string out = "pid,cluster\n";
  for (std::size_t i = 0; i < pids.size(); ++i) {
    out += csv::escape(pids[i]) + ',' + std::to_string(labels[i]) + '\n';
  }
  return out;
}

std::vector<std::pair<std::string, int>> read_assignments(const std::string& text) {
  const auto lines = csv::lines(text);
  if (lines.empty()) throw SchemaError("assignments file: missing header");
  const auto header = csv::split_line(lines[0]);
  if (header.size() < 2) throw SchemaError("assignments file: expected pid,<label> header");
  std::vector<std::pair<std::string, int>> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = csv::split_line(lines[i]);
    if (f.size() < 2) throw SchemaError("assignments file line " + std::to_string(i + 1) + ": expected 2 fields");
    out.emplace_back(f[0], std::stoi(f[1]));
  }
  return out;
}

fs::path output_path(const RunConfig& config, const std::string& name) {
  return fs::path(config.output_dir) / name;
}

namespace {

void write_out(const RunConfig& config, const std::string& name, std::string_view content) {
  fs::create_directories(config.output_dir);
  csv::write_file(output_path(config, name).string(), content);
}

ingest::Window window_of(const RunConfig& config) {
  return {ingest::parse_timestamp(config.window_start), config.window_days};
}

std::vector<int> align_truth(const RunConfig& config, const std::vector<std::string>& pids) {
  std::map<std::string, int> truth;
  for (const auto& [pid, label] : read_assignments(csv::read_file(config.truth_path))) truth[pid] = label;
  std::vector<int> out;
  for (const auto& pid : pids) {
    auto it = truth.find(pid);
    if (it == truth.end()) throw Error("truth file has no label for pid " + pid);
    out.push_back(it->second);
  }
  return out;
}

}  // namespace

IngestOutput run_ingest(const RunConfig& config) {
  IngestOutput out;
  auto parsed = ingest::parse_activity_records(csv::read_file(config.activities_file()));
  out.row_errors = parsed.errors;
  std::vector<ingest::PersonProfile> profiles;
  if (const auto path = config.profiles_file(); !path.empty()) {
    auto p = ingest::parse_profiles(csv::read_file(path));
    profiles = std::move(p.rows);
    out.row_errors.insert(out.row_errors.end(), p.errors.begin(), p.errors.end());
  }
  auto cleaned = ingest::clean(std::move(parsed.rows), std::move(profiles), config.cleaning);
  out.report = cleaned.report;

  auto built = ingest::build_all_series(cleaned.records, window_of(config), config.granularity,
                                        config.threads);
  out.report.users_low_coverage += built.empty.size();
  for (auto& s : built.series) {
    if (s.coverage < config.cleaning.min_coverage) {
      ++out.report.users_low_coverage;
    } else {
      out.series.push_back(std::move(s));
    }
  }
  std::map<std::string, bool> kept;
  for (const auto& s : out.series) kept[s.pid] = true;
  for (auto& p : cleaned.profiles) {
    if (kept.count(p.pid)) out.profiles.push_back(std::move(p));
  }
  out.report.retained_users = out.series.size();
  std::size_t records = 0;
  for (const auto& r : cleaned.records) records += kept.count(r.pid);
  out.report.retained_records = records;
  return out;
}

ClusterOutput run_cluster(const RunConfig& config,
                          const std::vector<ingest::CategorizedSeries>& series,
                          const std::vector<int>* truth) {
  if (series.size() < 2) throw Error("clustering needs at least 2 persons, got " + std::to_string(series.size()));
  ClusterOutput out;
  std::vector<CodeSequence> codes;
  for (const auto& s : series) {
    out.pids.push_back(s.pid);
    codes.push_back(s.values);
    if (s.values.size() != series.front().values.size()) throw Error("series lengths differ");
  }
  const std::size_t n = series.size();

  const auto topo = topological_features(series, config.walsh_mode, config.k_levels,
                                         config.grid_size, config.threads);
  const auto d_topo = topological_distance_matrix(topo, out.pids, config.threads);
  const auto d_geo = geometry::geometric_distance_matrix(codes, config.geometry,
                                                         config.resample_factor, out.pids,
                                                         config.threads);
  const auto d = cluster::combine_matrices(d_topo, d_geo, config.gamma);

  cluster::CakConfig cak;
  cak.ap = config.ap;
  cak.ap.seed = config.seed;
  cak.mode = config.refine_mode;
  cak.min_size = config.min_cluster_size;
  out.result = cluster::cak_cluster(topo.vectors, d, cak);

  cluster::FeatureMatrix harness_features =
      config.refine_mode == cluster::RefineMode::vector
          ? topo.vectors
          : eval::classical_mds(d, std::min(config.harness_dims, n - 1));

  auto& v = out.validity;
  const int k_max = std::min<int>(config.k_max, static_cast<int>(n) - 1);
  if (k_max >= config.k_min) v.curve = eval::validity_curve(d, config.k_min, k_max);
  v.cak_k = out.result.k;
  if (v.curve.ks.size() >= 3) {
    v.elbow_k = eval::elbow_select(v.curve.ks, v.curve.sse);
    double best = -2.0;
    for (std::size_t i = 0; i < v.curve.ks.size(); ++i) {
      if (std::isfinite(v.curve.silhouette[i]) && v.curve.silhouette[i] > best) {
        best = v.curve.silhouette[i];
        v.silhouette_k = v.curve.ks[i];
      }
    }
    v.chosen_k = eval::select_k(v.curve.ks, v.curve.sse, v.curve.silhouette);
  } else {
    v.elbow_k = v.chosen_k = out.result.k;
  }
  if (out.result.k >= 2) {
    v.cak_silhouette = eval::silhouette(d, out.result.labels);
    try {
      v.cak_ch = eval::ch_score(harness_features, out.result.labels);
    } catch (const Error&) {
      // undefined CH (k = n or zero dispersion) stays null
    }
  }
  if (truth) v.ari = eval::adjusted_rand_index(out.result.labels, *truth);

  eval::ComparisonConfig cmp;
  cmp.cak = cak;
  cmp.restarts = config.harness_restarts;
  cmp.seed = config.seed;
  out.comparison = eval::comparison_harness(harness_features, d, cmp);

  out.mds = eval::classical_mds(d, std::min(config.mds_dims, n - 1));

  if (config.diagnostics) {
    write_out(config, "distances_topo.csv", d_topo.to_csv());
    write_out(config, "distances_geo.csv", d_geo.to_csv());
    write_out(config, "distances_combined.csv", d.to_csv());
    std::string dg = "pid,channel,birth,death,essential\n";
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < topo.diagrams[i].size(); ++c) {
        for (const auto& p : topo.diagrams[i][c].pairs) {
          dg += csv::escape(out.pids[i]) + ',' + std::to_string(c) + ',' +
                csv::format_number(p.birth) + ',' + csv::format_number(p.death) + ',' +
                (p.essential ? "1" : "0") + '\n';
        }
      }
    }
    write_out(config, "diagrams.csv", dg);
    std::string ls = "pid";
    for (std::size_t j = 0; j < topo.vectors.front().size(); ++j) ls += ",f" + std::to_string(j);
    ls += '\n';
    for (std::size_t i = 0; i < n; ++i) {
      ls += csv::escape(out.pids[i]);
      for (double x : topo.vectors[i]) ls += ',' + csv::format_number(x);
      ls += '\n';
    }
    write_out(config, "landscapes.csv", ls);
    std::string sp = "pid";
    const auto t2 = walsh::padded_length(series.front().values.size());
    for (std::size_t m = 0; m < t2; ++m) sp += ",F" + std::to_string(m + 1);
    sp += '\n';
    for (const auto& s : series) {
      sp += csv::escape(s.pid);
      for (double x : walsh::transform_codes(s.values).coefficients) sp += ',' + csv::format_number(x);
      sp += '\n';
    }
    write_out(config, "spectra.csv", sp);
  }
  return out;
}

std::vector<report::ClusterProfile> cluster_profiles(
    const std::vector<ingest::CategorizedSeries>& series, const std::vector<int>& labels,
    const DistanceMatrix* distances) {
  int k = 0;
  for (int l : labels) k = std::max(k, l + 1);
  std::vector<report::ClusterProfile> out;
  cluster::ClusteringResult tmp;
  tmp.labels = labels;
  for (int c = 0; c < k; ++c) {
    std::vector<const ingest::CategorizedSeries*> members;
    for (std::size_t i = 0; i < series.size(); ++i) {
      if (labels[i] == c) members.push_back(&series[i]);
    }
    if (members.empty()) continue;
    report::ClusterProfile p;
    p.cluster = c;
    p.size = members.size();
    p.shares = report::activity_shares(members);
    if (distances) p.representative_pid = series[cluster::representative(tmp, *distances, c)].pid;
    out.push_back(std::move(p));
  }
  return out;
}

void stage_synth(const RunConfig& config) {
  synth::PopulationConfig pc;
  pc.per_spec_count = config.synth.per_spec_count;
  pc.days = config.synth.days;
  pc.granularity = config.granularity;
  pc.seed = config.seed;
  pc.start = ingest::parse_timestamp(config.window_start);
  const auto pop = synth::generate_population(
      synth::default_archetypes(config.synth.flip_prob, config.synth.jitter_minutes), pc);
  write_out(config, "activities.csv", ingest::write_activity_records(pop.records));
  write_out(config, "profiles.csv", ingest::write_profiles(pop.profiles));
  write_out(config, "truth.csv", synth::write_truth(pop));
}

namespace {

void write_ingest(const RunConfig& config, const IngestOutput& out) {
  ordered_json j = ordered_json::parse(out.report.to_json());
  j["row_errors"] = out.row_errors.size();
  ordered_json sample = ordered_json::array();
  for (std::size_t i = 0; i < out.row_errors.size() && i < 20; ++i) {
    sample.push_back({{"line", out.row_errors[i].line}, {"message", out.row_errors[i].message}});
  }
  j["row_error_sample"] = sample;
  write_out(config, "cleaning_report.json", j.dump(2) + "\n");
  write_out(config, "series.csv", write_series(out.series));
  write_out(config, "profiles_clean.csv", ingest::write_profiles(out.profiles));
}

std::string mds_csv(const std::vector<std::string>& pids, const cluster::FeatureMatrix& coords) {
  std::string out = "pid";
  const std::size_t dims = coords.empty() ? 0 : coords.front().size();
  static const char* kAxes[] = {"x", "y", "z"};
  for (std::size_t d = 0; d < dims; ++d) out += std::string(",") + (d < 3 ? kAxes[d] : ("d" + std::to_string(d)).c_str());
  out += '\n';
  for (std::size_t i = 0; i < pids.size(); ++i) {
    out += csv::escape(pids[i]);
    for (double x : coords[i]) out += ',' + csv::format_fixed(x, 9);
    out += '\n';
  }
  return out;
}

void write_cluster(const RunConfig& config, const ClusterOutput& out) {
  write_out(config, "assignments.csv", write_assignments(out.pids, out.result.labels));
  write_out(config, "validity.json", out.validity.to_json());
  write_out(config, "comparison.csv", out.comparison.to_csv());
  write_out(config, "mds.csv", mds_csv(out.pids, out.mds));

  ordered_json j;
  j["k"] = out.result.k;
  j["sizes"] = out.result.sizes;
  ordered_json reps = ordered_json::array();
  for (std::size_t m : out.result.medoids) reps.push_back(out.pids[m]);
  j["medoids"] = reps;
  ordered_json merges = ordered_json::array();
  for (const auto& [from, to] : out.result.merge_log) merges.push_back({{"source", from}, {"target", to}});
  j["merge_log"] = merges;
  j["refine"] = {{"mode", cluster::to_string(config.refine_mode)},
                 {"iterations", out.result.iterations},
                 {"updates", out.result.updates},
                 {"objective_trace", out.result.objective_trace}};
  ordered_json ex = ordered_json::array();
  for (std::size_t e : out.result.ap_exemplars) ex.push_back(out.pids[e]);
  j["affinity_propagation"] = {{"exemplars", ex},
                               {"iterations", out.result.ap_iterations},
                               {"converged", out.result.ap_converged}};
  write_out(config, "cluster_result.json", j.dump(2) + "\n");
}

std::vector<ingest::CategorizedSeries> load_or_ingest(const RunConfig& config) {
  const auto path = output_path(config, "series.csv");
  if (fs::exists(path)) return read_series(csv::read_file(path.string()));
  config.validate(true);
  auto out = run_ingest(config);
  write_ingest(config, out);
  return std::move(out.series);
}

}  // namespace

void stage_ingest(const RunConfig& config) {
  config.validate(true);
  write_ingest(config, run_ingest(config));
}

void stage_cluster(const RunConfig& config) {
  const auto series = load_or_ingest(config);
  std::vector<int> truth;
  if (!config.truth_path.empty()) {
    std::vector<std::string> pids;
    for (const auto& s : series) pids.push_back(s.pid);
    truth = align_truth(config, pids);
  }
  write_cluster(config, run_cluster(config, series, truth.empty() ? nullptr : &truth));
}

void stage_report(const RunConfig& config) {
  const auto series = read_series(csv::read_file(output_path(config, "series.csv").string()));
  const auto assigned = read_assignments(csv::read_file(output_path(config, "assignments.csv").string()));
  if (assigned.size() != series.size()) throw Error("assignments and series differ in length");
  std::vector<int> labels;
  std::vector<std::string> pids;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (assigned[i].first != series[i].pid) throw Error("assignments are not in series order");
    labels.push_back(assigned[i].second);
    pids.push_back(series[i].pid);
  }

  auto profiles = cluster_profiles(series, labels, nullptr);
  const auto result_path = output_path(config, "cluster_result.json");
  if (fs::exists(result_path)) {
    const auto j = json::parse(csv::read_file(result_path.string()));
    const auto medoids = j.at("medoids").get<std::vector<std::string>>();
    for (auto& p : profiles) {
      if (static_cast<std::size_t>(p.cluster) < medoids.size()) p.representative_pid = medoids[static_cast<std::size_t>(p.cluster)];
    }
  }

  std::vector<ingest::PersonProfile> demo;
  const auto clean_profiles = output_path(config, "profiles_clean.csv");
  if (fs::exists(clean_profiles)) {
    demo = ingest::parse_profiles(csv::read_file(clean_profiles.string())).rows;
  } else if (const auto profiles = config.profiles_file(); !profiles.empty() && fs::exists(profiles)) {
    demo = ingest::parse_profiles(csv::read_file(profiles)).rows;
  }
  const auto table = report::demographics_table(labels, pids, demo, series, config.demographics);

  write_out(config, "shares.csv", report::shares_csv(profiles));
  write_out(config, "clusters.csv", report::clusters_csv(profiles));
  write_out(config, "representatives.csv", report::representatives_csv(profiles, series));
  write_out(config, "demographics.csv", table.to_csv());
}

int run_pipeline(const RunConfig& config) {
  using clock = std::chrono::steady_clock;
  ordered_json manifest;
  manifest["version"] = kVersion;
  manifest["seed"] = config.seed;
  manifest["config"] = config.to_json();
  ordered_json timings = ordered_json::object();
  std::string failed_stage;
  std::string failure;

  auto stage = [&](const std::string& name, auto&& body) {
    if (!failed_stage.empty()) return;
    const auto t0 = clock::now();
    try {
      body();
    } catch (const std::exception& e) {
      failed_stage = name;
      failure = e.what();
    }
    timings[name] = std::chrono::duration<double>(clock::now() - t0).count();
  };

  fs::create_directories(config.output_dir);
  // stale intermediate artifacts from an earlier run must not leak in
  for (const char* name : {"series.csv", "assignments.csv", "cluster_result.json"}) {
    fs::remove(output_path(config, name));
  }
  stage("ingest", [&] { stage_ingest(config); });
  stage("cluster", [&] { stage_cluster(config); });
  stage("report", [&] { stage_report(config); });

  manifest["stage_seconds"] = timings;
  if (failed_stage.empty()) {
    manifest["status"] = "ok";
  } else {
    manifest["status"] = "failed";
    manifest["failure"] = {{"stage", failed_stage}, {"message", failure}};
  }
  ordered_json artifacts = ordered_json::array();
  for (const char* name : {"cleaning_report.json", "series.csv", "assignments.csv", "validity.json",
                           "comparison.csv", "mds.csv", "cluster_result.json", "shares.csv",
                           "clusters.csv", "representatives.csv", "demographics.csv"}) {
    if (fs::exists(output_path(config, name))) artifacts.push_back(name);
  }
  manifest["artifacts"] = artifacts;
  write_out(config, "manifest.json", manifest.dump(2) + "\n");
  if (!failed_stage.empty()) throw Error(failed_stage + ": " + failure);
  return 0;
}

}  // namespace atpm::pipeline
