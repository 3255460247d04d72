#include "atpm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <Eigen/Dense>

#include "json.hpp"

#include "atpm/csv.hpp"

namespace atpm::eval {

namespace {

std::size_t distinct_labels(std::span<const int> labels) {
  return std::set<int>(labels.begin(), labels.end()).size();
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

double sse(const FeatureMatrix& features, std::span<const int> labels,
           const FeatureMatrix& centroids) {
  if (labels.size() != features.size()) throw InvalidArgument("sse: label count mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const int l = labels[i];
    if (l < 0 || static_cast<std::size_t>(l) >= centroids.size()) {
      throw InvalidArgument("sse: label " + std::to_string(l) + " out of range");
    }
    const auto& c = centroids[static_cast<std::size_t>(l)];
    if (c.size() != features[i].size()) throw InvalidArgument("sse: dimension mismatch");
    for (std::size_t j = 0; j < c.size(); ++j) {
      const double d = features[i][j] - c[j];
      total += d * d;
    }
  }
  return total;
}

double silhouette(const DistanceMatrix& distances, std::span<const int> labels) {
  const std::size_t n = distances.size();
  if (labels.size() != n) throw InvalidArgument("silhouette: label count mismatch");
  if (n < 2 || distinct_labels(labels) < 2) {
    throw InvalidArgument("silhouette undefined for k=1");
  }
  std::map<int, std::size_t> sizes;
  for (int l : labels) ++sizes[l];

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (sizes[labels[i]] == 1) continue;  // singleton scores 0
    std::map<int, double> sums;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sums[labels[j]] += distances(i, j);
    }
    const double a = sums[labels[i]] / static_cast<double>(sizes[labels[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [label, sum] : sums) {
      if (label != labels[i]) b = std::min(b, sum / static_cast<double>(sizes[label]));
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

double ch_score(const FeatureMatrix& features, std::span<const int> labels) {
  const std::size_t n = features.size();
  if (labels.size() != n) throw InvalidArgument("ch_score: label count mismatch");
  const std::size_t k = distinct_labels(labels);
  if (k < 2 || k >= n) throw InvalidArgument("ch_score requires 2 <= k < n");
  const std::size_t dim = features.front().size();

  std::vector<double> mean(dim, 0.0);
  std::map<int, std::pair<std::size_t, std::vector<double>>> groups;
  for (std::size_t i = 0; i < n; ++i) {
    auto& g = groups[labels[i]];
    if (g.second.empty()) g.second.assign(dim, 0.0);
    ++g.first;
    for (std::size_t j = 0; j < dim; ++j) {
      g.second[j] += features[i][j];
      mean[j] += features[i][j];
    }
  }
  for (double& v : mean) v /= static_cast<double>(n);
  for (auto& [label, g] : groups) {
    for (double& v : g.second) v /= static_cast<double>(g.first);
  }

  double between = 0.0, within = 0.0;
  for (const auto& [label, g] : groups) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = g.second[j] - mean[j];
      between += static_cast<double>(g.first) * d * d;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = groups[labels[i]].second;
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = features[i][j] - c[j];
      within += d * d;
    }
  }
  if (within == 0.0) throw InvalidArgument("degenerate zero within-cluster dispersion");
  return (between / static_cast<double>(k - 1)) / (within / static_cast<double>(n - k));
}

int elbow_select(std::span<const int> ks, std::span<const double> sse_curve) {
  if (ks.size() != sse_curve.size()) throw InvalidArgument("elbow_select: size mismatch");
  if (ks.size() < 3) throw InvalidArgument("elbow_select needs at least 3 points");
  const double x0 = ks.front(), y0 = sse_curve.front();
  const double x1 = ks.back(), y1 = sse_curve.back();
  const double slope = (y1 - y0) / (x1 - x0);
  std::size_t best = 1;
  double best_gap = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < ks.size(); ++i) {
    const double chord = y0 + slope * (ks[i] - x0);
    const double gap = chord - sse_curve[i];
    if (gap > best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  return ks[best];
}

int select_k(std::span<const int> ks, std::span<const double> sse_curve,
             std::span<const double> silhouette_curve) {
  const int elbow = elbow_select(ks, sse_curve);
  std::optional<int> sil_k;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < silhouette_curve.size() && i < ks.size(); ++i) {
    if (std::isfinite(silhouette_curve[i]) && silhouette_curve[i] > best) {
      best = silhouette_curve[i];
      sil_k = ks[i];
    }
  }
  if (sil_k && std::abs(*sil_k - elbow) > 1) return *sil_k;
  return elbow;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw InvalidArgument("adjusted_rand_index: length mismatch");
  const auto n = static_cast<double>(a.size());
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, c] : table) index += choose2(c);
  for (const auto& [key, c] : rows) sum_a += choose2(c);
  for (const auto& [key, c] : cols) sum_b += choose2(c);
  const double expected = sum_a * sum_b / choose2(n);
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;  // both trivial partitions
  return (index - expected) / (max_index - expected);
}

FeatureMatrix classical_mds(const DistanceMatrix& distances, std::size_t dims) {
  const std::size_t n = distances.size();
  if (n == 0) return {};
  if (dims > n - 1 && !(n == 1 && dims == 0)) {
    throw InvalidArgument("classical_mds: dims must be at most n - 1");
  }
  const double scale = std::max(1.0, distances.max());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(distances(i, j) - distances(j, i)) > 1e-12 * scale) {
        throw InvalidArgument("classical_mds: matrix is not symmetric");
      }
    }
  }

  Eigen::MatrixXd sq(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = distances(i, j);
      sq(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d * d;
    }
  }
  const Eigen::VectorXd row_mean = sq.rowwise().mean();
  const double grand = row_mean.mean();
  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n); ++j) {
      gram(i, j) = -0.5 * (sq(i, j) - row_mean(i) - row_mean(j) + grand);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) throw Error("classical_mds: eigen decomposition failed");

  FeatureMatrix coords(n, std::vector<double>(dims, 0.0));
  const auto& values = solver.eigenvalues();  // ascending
  const auto& vectors = solver.eigenvectors();
  for (std::size_t d = 0; d < dims; ++d) {
    const Eigen::Index col = static_cast<Eigen::Index>(n - 1 - d);
    const double lambda = values(col);
    if (!(lambda > 1e-12 * std::max(1.0, std::abs(values(static_cast<Eigen::Index>(n - 1)))))) {
      continue;
    }
    Eigen::VectorXd v = vectors.col(col);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    const double s = std::sqrt(lambda);
    for (std::size_t i = 0; i < n; ++i) coords[i][d] = v(static_cast<Eigen::Index>(i)) * s;
  }
  return coords;
}

namespace {

struct MedoidState {
  std::vector<std::size_t> medoids;
  std::vector<int> labels;
  double sse = 0.0;
};

double assign_squared(const DistanceMatrix& d, MedoidState& st) {
  const std::size_t n = d.size();
  st.labels.assign(n, 0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < st.medoids.size(); ++c) {
      const double v = d(i, st.medoids[c]) * d(i, st.medoids[c]);
      if (v < best) {
        best = v;
        st.labels[i] = static_cast<int>(c);
      }
    }
    total += best;
  }
  return total;
}

void refine_squared(const DistanceMatrix& d, MedoidState& st) {
  const std::size_t n = d.size();
  for (int it = 0; it < 300; ++it) {
    st.sse = assign_squared(d, st);
    bool moved = false;
    for (std::size_t c = 0; c < st.medoids.size(); ++c) {
      double current = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (st.labels[j] == static_cast<int>(c)) current += d(st.medoids[c], j) * d(st.medoids[c], j);
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (st.labels[i] != static_cast<int>(c)) continue;
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (st.labels[j] == static_cast<int>(c)) sum += d(i, j) * d(i, j);
        }
        if (sum < current) {
          current = sum;
          st.medoids[c] = i;
          moved = true;
        }
      }
    }
    if (!moved) return;
  }
  st.sse = assign_squared(d, st);
}

void add_greedy_medoid(const DistanceMatrix& d, MedoidState& st) {
  const std::size_t n = d.size();
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m : st.medoids) nearest[i] = std::min(nearest[i], d(i, m) * d(i, m));
  }
  std::size_t best = n;
  double best_total = std::numeric_limits<double>::infinity();
  for (std::size_t cand = 0; cand < n; ++cand) {
    if (std::find(st.medoids.begin(), st.medoids.end(), cand) != st.medoids.end()) continue;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += std::min(nearest[i], d(i, cand) * d(i, cand));
    if (total < best_total) {
      best_total = total;
      best = cand;
    }
  }
  if (best < n) st.medoids.push_back(best);
}

}  // namespace

ValidityCurve validity_curve(const DistanceMatrix& distances, int k_min, int k_max) {
  const auto n = static_cast<int>(distances.size());
  if (k_min < 1 || k_max < k_min) throw InvalidArgument("validity_curve: bad k range");
  k_max = std::min(k_max, n);
  ValidityCurve curve;
  MedoidState st;
  while (static_cast<int>(st.medoids.size()) < k_min) add_greedy_medoid(distances, st);
  for (int k = k_min; k <= k_max; ++k) {
    if (k > k_min) add_greedy_medoid(distances, st);
    refine_squared(distances, st);
    curve.ks.push_back(k);
    curve.sse.push_back(st.sse);
    double s = std::numeric_limits<double>::quiet_NaN();
    if (distinct_labels(st.labels) >= 2) s = silhouette(distances, st.labels);
    curve.silhouette.push_back(s);
    curve.labels.push_back(st.labels);
  }
  return curve;
}

std::string ValidityReport::to_json() const {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  nlohmann::ordered_json j;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < curve.ks.size(); ++i) {
    rows.push_back({{"k", curve.ks[i]},
                    {"sse", curve.sse[i]},
                    {"silhouette", std::isfinite(curve.silhouette[i])
                                       ? nlohmann::ordered_json(curve.silhouette[i])
                                       : nlohmann::ordered_json(nullptr)}});
  }
  j["curve"] = rows;
  j["elbow_k"] = elbow_k;
  j["silhouette_k"] = silhouette_k ? nlohmann::ordered_json(*silhouette_k) : nlohmann::ordered_json(nullptr);
  j["chosen_k"] = chosen_k;
  j["cak_k"] = cak_k;
  j["cak_silhouette"] = opt(cak_silhouette);
  j["cak_ch"] = opt(cak_ch);
  j["ari"] = opt(ari);
  return j.dump(2) + "\n";
}

std::optional<double> ComparisonTable::median_ch(const std::string& method) const {
  std::vector<double> values;
  for (const auto& r : rows) {
    if (r.method == method && r.ch) values.push_back(*r.ch);
  }
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::string ComparisonTable::to_csv() const {
  std::string out = "method,run,seed,k,ch,error\n";
  for (const auto& r : rows) {
    out += r.method + ',' + std::to_string(r.run) + ',' + std::to_string(r.seed) + ',' +
           std::to_string(r.k) + ',' + (r.ch ? csv::format_number(*r.ch) : std::string()) +
           ',' + csv::escape(r.error) + '\n';
  }
  return out;
}

namespace {

std::vector<std::size_t> random_distinct(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  // partial Fisher-Yates with explicit modular draws keeps the sequence
  // independent of the standard library's distribution implementations
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

ComparisonRow score(std::string method, int run, std::uint64_t seed,
                    const FeatureMatrix& features, const std::vector<int>& labels) {
  ComparisonRow row{std::move(method), run, seed, 0, std::nullopt, {}};
  row.k = static_cast<int>(distinct_labels(labels));
  try {
    row.ch = ch_score(features, labels);
  } catch (const Error& e) {
    row.error = e.what();
  }
  return row;
}

}  // namespace

ComparisonTable comparison_harness(const FeatureMatrix& features, const DistanceMatrix& distances,
                                   const ComparisonConfig& config) {
  if (features.size() != distances.size()) {
    throw InvalidArgument("comparison_harness: features and distances differ in size");
  }
  ComparisonTable table;
  const std::size_t n = distances.size();

  cluster::CakConfig cak_cfg = config.cak;
  cak_cfg.ap.seed = config.seed;
  const auto cak = cluster::cak_cluster(features, distances, cak_cfg);
  table.rows.push_back(score("cak", 0, config.seed, features, cak.labels));
  const auto k = static_cast<std::size_t>(cak.k);

  for (int run = 0; run < config.restarts; ++run) {
    const std::uint64_t seed = mix_seed(config.seed, static_cast<std::uint64_t>(run));
    FeatureMatrix init;
    for (std::size_t i : random_distinct(n, k, seed)) init.push_back(features[i]);
    try {
      const auto km = cluster::kmeans_refine_vector(features, init, config.max_iter);
      table.rows.push_back(score("kmeans_random", run, seed, features, km.labels));
    } catch (const Error& e) {
      table.rows.push_back({"kmeans_random", run, seed, static_cast<int>(k), std::nullopt, e.what()});
    }
  }
  for (int run = 0; run < config.restarts; ++run) {
    const std::uint64_t seed = mix_seed(config.seed ^ 0x6b6d65646f696473ULL, static_cast<std::uint64_t>(run));
    try {
      const auto km = cluster::kmedoids_refine_matrix(distances, random_distinct(n, k, seed),
                                                      config.max_iter);
      table.rows.push_back(score("kmedoids_random", run, seed, features, km.labels));
    } catch (const Error& e) {
      table.rows.push_back({"kmedoids_random", run, seed, static_cast<int>(k), std::nullopt, e.what()});
    }
  }
  return table;
}

}  // namespace atpm::eval
