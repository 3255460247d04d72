#include "atpm/geometry.hpp"

#include <algorithm>
#include <bitset>
#include <cmath>
#include <string>

#include "atpm/ingest.hpp"

namespace atpm::geometry {

void GeometryConfig::validate() const {
  if (!(indel > 0.0)) throw InvalidArgument("geometry: indel penalty d must be > 0");
  if (agenda && !(*agenda >= 0.0)) throw InvalidArgument("geometry: agenda parameter Y must be >= 0");
  if (!(w_edit >= 0.0) || !(w_agenda >= 0.0)) {
    throw InvalidArgument("geometry: weights must be >= 0");
  }
  if (!(w_edit + w_agenda > 0.0)) throw InvalidArgument("geometry: w1 + w2 must be > 0");
}

double edit_distance(std::span<const Code> x, std::span<const Code> y, double indel) {
  // D(i, 0) = i*d, D(0, j) = j*d; two rolling rows.
  std::vector<double> prev(y.size() + 1), cur(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) prev[j] = static_cast<double>(j) * indel;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    cur[0] = static_cast<double>(i) * indel;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      const double sub = prev[j - 1] + (x[i - 1] == y[j - 1] ? 0.0 : 1.0);
      cur[j] = std::min({prev[j] + indel, cur[j - 1] + indel, sub});
    }
    std::swap(prev, cur);
  }
  return prev[y.size()];
}

double agenda_dissimilarity(std::span<const Code> x, std::span<const Code> y, double agenda) {
  std::bitset<256> a, b;
  for (Code c : x) a.set(c);
  for (Code c : y) b.set(c);
  const auto uni = (a | b).count();
  if (uni == 0) return 0.0;
  const auto inter = (a & b).count();
  return agenda * (1.0 - static_cast<double>(inter) / static_cast<double>(uni));
}

double combined_distance(std::span<const Code> x, std::span<const Code> y,
                         const GeometryConfig& config) {
  const double agenda =
      config.agenda.value_or(static_cast<double>(std::max(x.size(), y.size())));
  double total = 0.0;
  if (config.w_edit != 0.0) total += config.w_edit * edit_distance(x, y, config.indel);
  if (config.w_agenda != 0.0) total += config.w_agenda * agenda_dissimilarity(x, y, agenda);
  return total;
}

DistanceMatrix geometric_distance_matrix(const std::vector<CodeSequence>& series,
                                         const GeometryConfig& config,
                                         int resample_factor,
                                         std::vector<std::string> ids,
                                         unsigned threads) {
  config.validate();
  std::vector<CodeSequence> coarse;
  coarse.reserve(series.size());
  for (const auto& s : series) {
    if (!series.empty() && s.size() != series.front().size()) {
      throw InvalidArgument("geometric_distance_matrix: series lengths differ");
    }
    coarse.push_back(ingest::resample(s, resample_factor));
  }
  GeometryConfig resolved = config;
  if (!resolved.agenda) {
    resolved.agenda = coarse.empty() ? 0.0 : static_cast<double>(coarse.front().size());
  }

  const std::size_t n = series.size();
  DistanceMatrix m(n, std::move(ids));
  // Each worker fills whole rows of the upper triangle, so every cell has a
  // single writer.
  std::vector<std::vector<double>> upper(n);
  parallel_for(n, threads, [&](std::size_t i) {
    upper[i].resize(n - i - 1);
    for (std::size_t j = i + 1; j < n; ++j) {
      upper[i][j - i - 1] = combined_distance(coarse[i], coarse[j], resolved);
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) m.set(i, j, upper[i][j - i - 1]);
  }
  return m;
}

}  // namespace atpm::geometry
