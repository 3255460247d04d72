#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "atpm/report.hpp"
#include "atpm/synth.hpp"

using namespace atpm;

namespace {

ingest::CategorizedSeries constant(const std::string& pid, Code code, std::size_t bins) {
  ingest::CategorizedSeries s;
  s.pid = pid;
  s.start = synth::default_start();
  s.granularity = 60;
  s.values.assign(bins, code);
  s.coverage = 1.0;
  return s;
}

}  // namespace

TEST_CASE("default population shape and determinism") {
  const auto specs = synth::default_archetypes();
  REQUIRE(specs.size() == 5);
  synth::PopulationConfig cfg;
  const auto a = synth::generate_population(specs, cfg);
  const auto b = synth::generate_population(specs, cfg);
  CHECK(a.series.size() == 200);
  CHECK(a.labels.size() == 200);
  CHECK(*std::max_element(a.labels.begin(), a.labels.end()) == 4);
  CHECK(a.series.front().values.size() == 7u * 144u);
  CHECK(synth::write_truth(a) == synth::write_truth(b));
  CHECK(ingest::write_activity_records(a.records) == ingest::write_activity_records(b.records));
  for (std::size_t i = 0; i < a.series.size(); ++i) CHECK(a.series[i].values == b.series[i].values);

  cfg.seed = 2;
  const auto c = synth::generate_population(specs, cfg);
  CHECK(c.series[0].values != a.series[0].values);
}

TEST_CASE("noise-free members of an archetype are identical") {
  synth::PopulationConfig cfg;
  cfg.per_spec_count = 4;
  const auto pop = synth::generate_population(synth::default_archetypes(0.0, 0.0), cfg);
  for (std::size_t i = 0; i < pop.series.size(); ++i) {
    const std::size_t first = static_cast<std::size_t>(pop.labels[i]) * 4;
    CHECK(pop.series[i].values == pop.series[first].values);
  }
}

TEST_CASE("records rebuild the generated series") {
  synth::PopulationConfig cfg;
  cfg.per_spec_count = 2;
  const auto pop = synth::generate_population(synth::default_archetypes(), cfg);
  const ingest::Window w{cfg.start == 0 ? synth::default_start() : cfg.start, cfg.days};
  const auto rebuilt = ingest::build_all_series(pop.records, w, cfg.granularity);
  REQUIRE(rebuilt.series.size() == pop.series.size());
  for (std::size_t i = 0; i < pop.series.size(); ++i) {
    CHECK(rebuilt.series[i].values == pop.series[i].values);
  }
}

TEST_CASE("archetype templates are separable") {
  const auto specs = synth::default_archetypes();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto si = synth::template_shares(specs[i]);
    double sum = 0.0;
    for (double v : si) sum += v;
    CHECK(sum == doctest::Approx(1.0));
    for (std::size_t j = i + 1; j < specs.size(); ++j) {
      const auto sj = synth::template_shares(specs[j]);
      double l1 = 0.0;
      for (int c = 0; c < kActivityCount; ++c) l1 += std::abs(si[c] - sj[c]);
      CHECK(l1 >= 0.1);
    }
  }
}

TEST_CASE("invalid archetypes are rejected") {
  auto spec = synth::default_archetypes()[0];
  spec.flip_prob = 0.5;
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
  spec = synth::default_archetypes()[0];
  spec.weekday.pop_back();
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
  CHECK_THROWS_AS(synth::generate_population({}, {}), InvalidArgument);
}

TEST_CASE("activity shares") {
  const auto home = constant("a", 1, 168);
  const auto t = report::activity_shares({&home});
  for (int cell = 0; cell < report::kWeekHours; ++cell) CHECK(t.share(cell, 1) == 1.0);

  const auto work = constant("b", 2, 168);
  const auto mixed = report::activity_shares({&home, &work});
  CHECK(mixed.share(10, 1) == 0.5);
  CHECK(mixed.share(10, 2) == 0.5);

  // brute-force count on random 10-minute series over two weeks
  std::mt19937_64 rng(61);
  std::vector<ingest::CategorizedSeries> members(3);
  for (auto& m : members) {
    m.start = synth::default_start() + 30;
    m.granularity = 10;
    m.values.resize(2 * 7 * 144);
    for (auto& c : m.values) c = static_cast<Code>(rng() % 4);
  }
  std::vector<const ingest::CategorizedSeries*> ptrs;
  for (const auto& m : members) ptrs.push_back(&m);
  const auto table = report::activity_shares(ptrs);
  std::map<int, std::array<double, 4>> counts;
  for (const auto& m : members) {
    for (std::size_t b = 0; b < m.values.size(); ++b) {
      const long minute = 30 + static_cast<long>(b) * 10;  // start is Monday 00:30
      const int cell = static_cast<int>((minute / 60) % 168);
      counts[cell][m.values[b]] += 1;
    }
  }
  for (const auto& [cell, c] : counts) {
    const double total = c[0] + c[1] + c[2] + c[3];
    double sum = 0.0;
    for (int code = 0; code < 4; ++code) {
      CHECK(table.share(cell, code) == doctest::Approx(c[static_cast<std::size_t>(code)] / total));
      sum += table.share(cell, code);
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("demographics table") {
  std::vector<ingest::PersonProfile> profiles(4);
  const std::vector<std::string> pids{"a", "b", "c", "d"};
  const std::vector<double> arpu{10, 20, 40, 70};
  for (std::size_t i = 0; i < 4; ++i) {
    profiles[i].pid = pids[i];
    profiles[i].gender = i < 2 ? ingest::Gender::male : ingest::Gender::female;
    profiles[i].arpu = arpu[i];
    profiles[i].brand = i == 0 ? "apple" : "Nokia";
  }
  const std::vector<int> split{0, 0, 1, 1};
  const auto t = report::demographics_table(split, pids, profiles, {});
  auto find = [&](const std::string& var, const std::string& cat) {
    for (const auto& r : t.rows) {
      if (r.variable == var && r.category == cat) return r;
    }
    FAIL("missing row " << var << "/" << cat);
    return report::DemographicsRow{};
  };
  CHECK(find("Gender", "Male").clusters == std::vector<double>{100, 0});
  CHECK(find("Gender", "Female").clusters == std::vector<double>{0, 100});
  CHECK(find("Mobile Brand", "Apple").clusters == std::vector<double>{50, 0});
  CHECK(find("Mobile Brand", "Others").overall == 75);
  REQUIRE(t.arpu.size() == 2);
  CHECK(t.arpu[0].clusters == std::vector<double>{15, 55});
  CHECK(t.arpu[0].overall == 35);
  CHECK(t.arpu[1].clusters[1] == doctest::Approx(std::sqrt(450.0)));
  CHECK(t.arpu[1].overall == doctest::Approx(std::sqrt((625 + 225 + 25 + 1225) / 3.0)));

  const std::vector<int> one{0, 0, 0, 0};
  const auto single = report::demographics_table(one, pids, profiles, {});
  for (const auto& r : single.rows) CHECK(r.clusters[0] == doctest::Approx(r.overall));
}

TEST_CASE("employment proxy") {
  auto s = constant("a", 1, 24);
  for (std::size_t h = 9; h < 17; ++h) s.values[h] = 2;
  CHECK(report::waking_work_share(s, {}) == doctest::Approx(8.0 / 16.0));
  CHECK(report::waking_work_share(constant("b", 1, 24), {}) == 0.0);
}
