#include <filesystem>

#include "doctest.h"
#include "atpm/csv.hpp"
#include "atpm/pipeline.hpp"

using namespace atpm;
namespace fs = std::filesystem;
namespace pl = atpm::pipeline;

namespace {

pl::RunConfig small_config(const std::string& name) {
  pl::RunConfig c;
  c.output_dir = (fs::temp_directory_path() / ("atpm_test_" + name)).string();
  fs::remove_all(c.output_dir);
  c.synth.per_spec_count = 8;
  c.cleaning.min_days = 5;
  c.harness_restarts = 3;
  return c;
}

std::string slurp(const pl::RunConfig& c, const std::string& name) {
  return csv::read_file(pl::output_path(c, name).string());
}

}  // namespace

TEST_CASE("config JSON round trip and validation") {
  pl::RunConfig c;
  c.gamma = 0.25;
  c.ap.preference = -3.0;
  c.walsh_mode = pl::WalshMode::one_hot;
  const auto back = pl::RunConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
  CHECK(back.to_json() == c.to_json());
  CHECK_NOTHROW(back.validate(false));

  auto bad = c;
  bad.gamma = 2.0;
  CHECK_THROWS_AS(bad.validate(false), pl::ConfigError);
  bad = c;
  bad.resample_factor = 5;
  CHECK_THROWS_AS(bad.validate(false), pl::ConfigError);
  CHECK_THROWS_AS(pl::RunConfig::from_json(nlohmann::json::parse(R"({"refine_mode": "tree"})")),
                  pl::ConfigError);
  CHECK_THROWS_AS(pl::RunConfig::load("/nonexistent/config.json"), pl::ConfigError);
}

TEST_CASE("shipped default config is valid") {
  const auto c = pl::RunConfig::load(std::string(ATPM_SOURCE_DIR) + "/config/default.json");
  CHECK_NOTHROW(c.validate(false));
  CHECK(c.ap.policy == cluster::PreferencePolicy::minimum);
}

TEST_CASE("missing input file names the path") {
  auto c = small_config("missing");
  c.activities_path = "/nonexistent/activities.csv";
  CHECK_THROWS_WITH_AS(c.validate(true), doctest::Contains("/nonexistent/activities.csv"),
                       pl::ConfigError);
}

TEST_CASE("series artifacts round trip") {
  ingest::CategorizedSeries s;
  s.pid = "x,1";
  s.start = ingest::parse_timestamp("2019-08-05 00:00");
  s.granularity = 10;
  s.values = {0, 1, 2, 3, 3};
  s.coverage = 0.8;
  const auto back = pl::read_series(pl::write_series({s}));
  REQUIRE(back.size() == 1);
  CHECK(back[0].pid == s.pid);
  CHECK(back[0].values == s.values);
  CHECK(back[0].coverage == s.coverage);
  CHECK(back[0].start == s.start);
}

TEST_CASE("synth then cluster without an explicit ingest") {
  auto c = small_config("chain");
  pl::stage_synth(c);
  pl::stage_cluster(c);
  CHECK(fs::exists(pl::output_path(c, "series.csv")));
  CHECK(fs::exists(pl::output_path(c, "assignments.csv")));
  pl::stage_report(c);
  CHECK(fs::exists(pl::output_path(c, "demographics.csv")));
}

TEST_CASE("end-to-end runs are reproducible across thread counts") {
  auto a = small_config("repro_a");
  auto b = small_config("repro_b");
  b.threads = 3;
  for (auto* c : {&a, &b}) {
    pl::stage_synth(*c);
    c->truth_path = pl::output_path(*c, "truth.csv").string();
    CHECK(pl::run_pipeline(*c) == 0);
  }
  for (const char* name : {"assignments.csv", "shares.csv", "demographics.csv", "mds.csv",
                           "comparison.csv", "series.csv"}) {
    CHECK_MESSAGE(slurp(a, name) == slurp(b, name), name);
  }
  const auto manifest = nlohmann::json::parse(slurp(a, "manifest.json"));
  CHECK(manifest.at("status") == "ok");
  CHECK(manifest.at("seed") == 1);
  CHECK(manifest.at("artifacts").size() >= 10);
}

TEST_CASE("stage failure is recorded in the manifest") {
  auto c = small_config("fail");
  fs::create_directories(c.output_dir);
  csv::write_file(pl::output_path(c, "activities.csv").string(),
                  "pid,date,t_start,t_end,longitude,latitude,ptype\n");
  CHECK_THROWS_AS(pl::run_pipeline(c), Error);
  const auto manifest = nlohmann::json::parse(slurp(c, "manifest.json"));
  CHECK(manifest.at("status") == "failed");
  CHECK(manifest.at("failure").at("stage") == "cluster");
}
