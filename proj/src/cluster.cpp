#include "atpm/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

namespace atpm::cluster {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

/// Drops clusters without members and renumbers the rest in order.
void compact(std::vector<int>& labels, std::vector<std::size_t>& medoids,
             FeatureMatrix* centroids) {
  std::vector<std::size_t> counts(medoids.size(), 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  std::vector<int> remap(medoids.size(), -1);
  std::vector<std::size_t> kept_medoids;
  FeatureMatrix kept_centroids;
  for (std::size_t c = 0; c < medoids.size(); ++c) {
    if (counts[c] == 0) continue;
    remap[c] = static_cast<int>(kept_medoids.size());
    kept_medoids.push_back(medoids[c]);
    if (centroids) kept_centroids.push_back((*centroids)[c]);
  }
  for (int& l : labels) l = remap[static_cast<std::size_t>(l)];
  medoids = std::move(kept_medoids);
  if (centroids) *centroids = std::move(kept_centroids);
}

}  // namespace

void recount(ClusteringResult& result) {
  int k = 0;
  for (int l : result.labels) {
    if (l < 0) throw InvalidArgument("negative cluster label");
    k = std::max(k, l + 1);
  }
  result.k = k;
  result.sizes.assign(static_cast<std::size_t>(k), 0);
  for (int l : result.labels) ++result.sizes[static_cast<std::size_t>(l)];
}

DistanceMatrix combine_matrices(const DistanceMatrix& topo, const DistanceMatrix& geo,
                                double gamma) {
  if (topo.size() != geo.size() || topo.ids() != geo.ids()) {
    throw InvalidArgument("combine_matrices: matrices describe different items");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidArgument("combine_matrices: gamma must lie in [0, 1]");
  const double tmax = topo.max();
  const double gmax = geo.max();
  const double ts = tmax > 0.0 ? gamma / tmax : 0.0;
  const double gs = gmax > 0.0 ? (1.0 - gamma) / gmax : 0.0;
  DistanceMatrix out(topo.size(), topo.ids());
  for (std::size_t i = 0; i < topo.size(); ++i) {
    for (std::size_t j = i + 1; j < topo.size(); ++j) {
      out.set(i, j, ts * topo(i, j) + gs * geo(i, j));
    }
  }
  return out;
}

double median_off_diagonal(std::span<const double> similarity, std::size_t n) {
  std::vector<double> off;
  off.reserve(n * (n - 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) off.push_back(similarity[i * n + j]);
    }
  }
  if (off.empty()) return 0.0;
  const std::size_t mid = off.size() / 2;
  std::nth_element(off.begin(), off.begin() + static_cast<std::ptrdiff_t>(mid), off.end());
  const double upper = off[mid];
  if (off.size() % 2 == 1) return upper;
  const double lower = *std::max_element(off.begin(), off.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double min_off_diagonal(std::span<const double> similarity, std::size_t n) {
  double lo = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (!any || similarity[i * n + j] < lo) lo = similarity[i * n + j];
      any = true;
    }
  }
  return lo;
}

PreferencePolicy parse_preference_policy(const std::string& text) {
  if (text == "median") return PreferencePolicy::median;
  if (text == "minimum") return PreferencePolicy::minimum;
  throw InvalidArgument("unknown preference policy: " + text);
}

std::string to_string(PreferencePolicy policy) {
  return policy == PreferencePolicy::median ? "median" : "minimum";
}

ApResult affinity_propagation(std::span<const double> similarity, std::size_t n,
                              const ApConfig& config) {
  if (similarity.size() != n * n) throw InvalidArgument("affinity_propagation: similarity is not n x n");
  if (!(config.damping >= 0.5 && config.damping < 1.0)) {
    throw InvalidArgument("affinity_propagation: damping must lie in [0.5, 1)");
  }
  if (config.max_iter < 1 || config.convergence_window < 1) {
    throw InvalidArgument("affinity_propagation: iteration limits must be positive");
  }
  ApResult out;
  if (n == 0) return out;
  double pref = 0.0;
  if (config.preference) {
    pref = *config.preference;
  } else if (config.policy == PreferencePolicy::minimum) {
    pref = min_off_diagonal(similarity, n);
  } else {
    pref = median_off_diagonal(similarity, n);
  }
  out.preference = pref;

  auto finish = [&](std::vector<std::size_t> exemplars) {
    out.exemplars = std::move(exemplars);
    out.labels.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto self = std::find(out.exemplars.begin(), out.exemplars.end(), i);
      if (self != out.exemplars.end()) {
        out.labels[i] = static_cast<int>(self - out.exemplars.begin());
        continue;
      }
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t e = 0; e < out.exemplars.size(); ++e) {
        const double s = similarity[i * n + out.exemplars[e]];
        if (s > best) {
          best = s;
          out.labels[i] = static_cast<int>(e);
        }
      }
    }
    return out;
  };

  if (n == 1) {
    out.converged = true;
    return finish({0});
  }

  // All off-diagonal similarities equal: message passing only oscillates, so
  // decide directly. A preference above the common similarity makes every
  // point its own exemplar; otherwise one exemplar takes everything.
  {
    const double first = similarity[1];
    bool uniform = true;
    for (std::size_t i = 0; i < n && uniform; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j && similarity[i * n + j] != first) {
          uniform = false;
          break;
        }
      }
    }
    if (uniform) {
      out.converged = true;
      if (pref > first) {
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), std::size_t{0});
        return finish(std::move(all));
      }
      return finish({0});
    }
  }

  std::vector<double> s(similarity.begin(), similarity.end());
  for (std::size_t k = 0; k < n; ++k) s[k * n + k] = pref;
  if (config.tie_noise) {
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    constexpr double eps = std::numeric_limits<double>::epsilon();
    constexpr double tiny = std::numeric_limits<double>::min() * 100.0;
    for (double& v : s) v += (eps * v + tiny) * gauss(rng);
  }

  std::vector<double> r(n * n, 0.0), a(n * n, 0.0), col(n);
  const double lambda = config.damping;
  std::vector<std::size_t> exemplars, previous;
  int stable = 0;

  for (int it = 1; it <= config.max_iter; ++it) {
    out.iterations = it;
    // responsibilities
    for (std::size_t i = 0; i < n; ++i) {
      double best = -std::numeric_limits<double>::infinity();
      double second = best;
      std::size_t arg = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const double v = a[i * n + k] + s[i * n + k];
        if (v > best) {
          second = best;
          best = v;
          arg = k;
        } else if (v > second) {
          second = v;
        }
      }
      for (std::size_t k = 0; k < n; ++k) {
        const double fresh = s[i * n + k] - (k == arg ? second : best);
        r[i * n + k] = lambda * r[i * n + k] + (1.0 - lambda) * fresh;
      }
    }
    // availabilities
    std::fill(col.begin(), col.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        const double v = r[i * n + k];
        col[k] += i == k ? v : std::max(0.0, v);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        const double rp = i == k ? r[i * n + k] : std::max(0.0, r[i * n + k]);
        double fresh = col[k] - rp;
        if (i != k) fresh = std::min(0.0, fresh);
        a[i * n + k] = lambda * a[i * n + k] + (1.0 - lambda) * fresh;
      }
    }

    exemplars.clear();
    for (std::size_t k = 0; k < n; ++k) {
      if (r[k * n + k] + a[k * n + k] > 0.0) exemplars.push_back(k);
    }
    stable = (it > 1 && exemplars == previous) ? stable + 1 : 1;
    previous = exemplars;
    if (!exemplars.empty() && stable >= config.convergence_window) {
      out.converged = true;
      break;
    }
  }

  if (exemplars.empty()) {
    // Fall back to the strongest self-evidence; flagged as non-converged.
    std::size_t best = 0;
    for (std::size_t k = 1; k < n; ++k) {
      if (r[k * n + k] + a[k * n + k] > r[best * n + best] + a[best * n + best]) best = k;
    }
    exemplars.push_back(best);
    out.converged = false;
  }
  return finish(std::move(exemplars));
}

ApResult affinity_propagation(const DistanceMatrix& distances, const ApConfig& config) {
  std::vector<double> sim(distances.data());
  for (double& v : sim) v = -v;
  return affinity_propagation(sim, distances.size(), config);
}

ClusteringResult kmeans_refine_vector(const FeatureMatrix& features,
                                      const FeatureMatrix& init_centroids,
                                      int max_iter) {
  const std::size_t n = features.size();
  const std::size_t k = init_centroids.size();
  if (k == 0) throw InvalidArgument("kmeans: no initial centroids");
  if (k > n) throw InvalidArgument("kmeans: more centroids than items");
  const std::size_t dim = features.front().size();
  for (const auto& row : features) {
    if (row.size() != dim) throw InvalidArgument("kmeans: ragged feature matrix");
  }
  for (const auto& c : init_centroids) {
    if (c.size() != dim) throw InvalidArgument("kmeans: centroid dimension mismatch");
  }

  ClusteringResult res;
  res.centroids = init_centroids;
  res.labels.assign(n, 0);
  std::vector<int> previous;
  std::vector<double> dist(n);

  for (int it = 0; it < max_iter; ++it) {
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_distance(features[i], res.centroids[c]);
        if (d < best) {
          best = d;
          res.labels[i] = static_cast<int>(c);
        }
      }
      dist[i] = best;
      sse += best;
    }
    res.objective_trace.push_back(sse);
    ++res.iterations;
    if (it > 0 && res.labels == previous) break;
    previous = res.labels;

    FeatureMatrix sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(res.labels[i]);
      ++counts[c];
      for (std::size_t j = 0; j < dim; ++j) sums[c][j] += features[i][j];
    }
    // Empty clusters take the point farthest from its centroid, drawn from a
    // cluster that can spare it.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(res.labels[i])] < 2) continue;
        if (far == n || dist[i] > dist[far]) far = i;
      }
      if (far == n) continue;
      const auto from = static_cast<std::size_t>(res.labels[far]);
      --counts[from];
      for (std::size_t j = 0; j < dim; ++j) sums[from][j] -= features[far][j];
      counts[c] = 1;
      sums[c] = features[far];
      res.labels[far] = static_cast<int>(c);
      dist[far] = 0.0;
      previous.clear();  // labels moved; force another pass
    }
    bool moved = false;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < dim; ++j) {
        const double m = sums[c][j] / static_cast<double>(counts[c]);
        if (m != res.centroids[c][j]) moved = true;
        res.centroids[c][j] = m;
      }
    }
    if (moved) ++res.updates;
    // fixed centroids reproduce the same assignment, so stop here
    if (!moved && !previous.empty()) break;
  }

  res.medoids.assign(k, 0);
  for (std::size_t c = 0; c < k; ++c) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (res.labels[i] != static_cast<int>(c)) continue;
      const double d = squared_distance(features[i], res.centroids[c]);
      if (d < best) {
        best = d;
        res.medoids[c] = i;
      }
    }
  }
  compact(res.labels, res.medoids, &res.centroids);
  recount(res);
  return res;
}

namespace {

std::size_t cluster_medoid(const DistanceMatrix& d, const std::vector<int>& labels, int c) {
  std::size_t best_item = labels.size();
  double best_sum = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != c) continue;
    double sum = 0.0;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] == c) sum += d(i, j);
    }
    if (sum < best_sum) {
      best_sum = sum;
      best_item = i;
    }
  }
  return best_item;
}

}  // namespace

ClusteringResult kmedoids_refine_matrix(const DistanceMatrix& distances,
                                        const std::vector<std::size_t>& init_medoids,
                                        int max_iter) {
  const std::size_t n = distances.size();
  const std::size_t k = init_medoids.size();
  if (k == 0) throw InvalidArgument("kmedoids: no initial medoids");
  if (k > n) throw InvalidArgument("kmedoids: more medoids than items");
  for (std::size_t m : init_medoids) {
    if (m >= n) throw InvalidArgument("kmedoids: medoid index out of range");
  }

  ClusteringResult res;
  res.medoids = init_medoids;
  res.labels.assign(n, 0);

  for (int it = 0; it < max_iter; ++it) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < res.medoids.size(); ++c) {
        const double d = distances(i, res.medoids[c]);
        if (d < best) {
          best = d;
          res.labels[i] = static_cast<int>(c);
        }
      }
      total += best;
    }
    res.objective_trace.push_back(total);
    ++res.iterations;
    compact(res.labels, res.medoids, nullptr);

    bool moved = false;
    for (std::size_t c = 0; c < res.medoids.size(); ++c) {
      const std::size_t m = cluster_medoid(distances, res.labels, static_cast<int>(c));
      // keep the current medoid unless another member is strictly better
      double current = 0.0, candidate = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (res.labels[j] != static_cast<int>(c)) continue;
        current += distances(res.medoids[c], j);
        candidate += distances(m, j);
      }
      if (candidate < current) {
        res.medoids[c] = m;
        moved = true;
      }
    }
    if (!moved) break;
    ++res.updates;
  }
  recount(res);
  return res;
}

std::size_t representative(const ClusteringResult& result, const DistanceMatrix& distances,
                           int cluster_id) {
  const std::size_t m = cluster_medoid(distances, result.labels, cluster_id);
  if (m == result.labels.size()) {
    throw InvalidArgument("representative: unknown or empty cluster " + std::to_string(cluster_id));
  }
  return m;
}

ClusteringResult merge_small_clusters(ClusteringResult result,
                                      const DistanceMatrix& distances,
                                      std::size_t min_size) {
  recount(result);
  if (min_size <= 1 || result.k <= 1) return result;
  const auto k = static_cast<std::size_t>(result.k);

  std::vector<bool> alive(k, true);
  std::vector<std::size_t> medoid(k);
  for (std::size_t c = 0; c < k; ++c) {
    if (result.sizes[c] == 0) {
      alive[c] = false;
      continue;
    }
    medoid[c] = representative(result, distances, static_cast<int>(c));
  }
  auto live_count = [&] { return std::count(alive.begin(), alive.end(), true); };

  while (live_count() > 1) {
    std::size_t source = k;
    for (std::size_t c = 0; c < k; ++c) {
      if (!alive[c] || result.sizes[c] >= min_size) continue;
      if (source == k || result.sizes[c] < result.sizes[source]) source = c;
    }
    if (source == k) break;

    std::size_t target = k;
    for (std::size_t c = 0; c < k; ++c) {
      if (!alive[c] || c == source) continue;
      if (target == k ||
          distances(medoid[source], medoid[c]) < distances(medoid[source], medoid[target])) {
        target = c;
      }
    }
    for (int& l : result.labels) {
      if (l == static_cast<int>(source)) l = static_cast<int>(target);
    }
    result.sizes[target] += result.sizes[source];
    result.sizes[source] = 0;
    alive[source] = false;
    result.merge_log.emplace_back(static_cast<int>(source), static_cast<int>(target));
    medoid[target] = representative(result, distances, static_cast<int>(target));
  }

  std::vector<std::size_t> medoids(k);
  for (std::size_t c = 0; c < k; ++c) medoids[c] = alive[c] ? medoid[c] : 0;
  FeatureMatrix* centroids = result.centroids.size() == k ? &result.centroids : nullptr;
  compact(result.labels, medoids, centroids);
  if (!centroids) result.centroids.clear();
  result.medoids = std::move(medoids);
  recount(result);
  return result;
}

RefineMode parse_refine_mode(const std::string& text) {
  if (text == "matrix") return RefineMode::matrix;
  if (text == "vector") return RefineMode::vector;
  throw InvalidArgument("unknown refine mode '" + text + "' (expected matrix or vector)");
}

std::string to_string(RefineMode mode) {
  return mode == RefineMode::matrix ? "matrix" : "vector";
}

std::size_t default_min_size(std::size_t n) {
  const auto five_percent = static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(n)));
  return std::max<std::size_t>(5, five_percent);
}

ClusteringResult cak_cluster(const FeatureMatrix& features, const DistanceMatrix& distances,
                             const CakConfig& config) {
  const std::size_t n = distances.size();
  if (config.mode == RefineMode::vector && features.size() != n) {
    throw InvalidArgument("cak_cluster: features and distance matrix differ in size");
  }
  if (n == 0) throw InvalidArgument("cak_cluster: no items");

  const ApResult ap = affinity_propagation(distances, config.ap);

  ClusteringResult res;
  if (config.mode == RefineMode::matrix) {
    res = kmedoids_refine_matrix(distances, ap.exemplars, config.max_iter);
  } else {
    FeatureMatrix init;
    for (std::size_t e : ap.exemplars) init.push_back(features[e]);
    res = kmeans_refine_vector(features, init, config.max_iter);
  }
  res.ap_exemplars = ap.exemplars;
  res.ap_iterations = ap.iterations;
  res.ap_converged = ap.converged;

  res = merge_small_clusters(std::move(res), distances,
                             config.min_size.value_or(default_min_size(n)));

  if (config.mode == RefineMode::vector) {
    const std::size_t dim = features.front().size();
    res.centroids.assign(static_cast<std::size_t>(res.k), std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      auto& c = res.centroids[static_cast<std::size_t>(res.labels[i])];
      for (std::size_t j = 0; j < dim; ++j) c[j] += features[i][j];
    }
    for (std::size_t c = 0; c < res.centroids.size(); ++c) {
      for (double& v : res.centroids[c]) v /= static_cast<double>(res.sizes[c]);
    }
  }
  return res;
}

DistanceMatrix euclidean_distances(const FeatureMatrix& features, unsigned threads) {
  const std::size_t n = features.size();
  DistanceMatrix m(n);
  std::vector<std::vector<double>> upper(n);
  parallel_for(n, threads, [&](std::size_t i) {
    upper[i].resize(n - i - 1);
    for (std::size_t j = i + 1; j < n; ++j) {
      upper[i][j - i - 1] = std::sqrt(squared_distance(features[i], features[j]));
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) m.set(i, j, upper[i][j - i - 1]);
  }
  return m;
}

}  // namespace atpm::cluster
