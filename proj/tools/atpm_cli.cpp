// Batch command-line front end for the activity-travel pattern pipeline.

#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "atpm/pipeline.hpp"

namespace {

using atpm::pipeline::RunConfig;

struct Overrides {
  std::string config_path;
  std::optional<std::string> activities, profiles, truth, output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<double> gamma;
  std::optional<std::string> refine_mode, walsh_mode;
  std::optional<int> per_spec_count;
  bool diagnostics = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_path, "JSON config file");
  cmd->add_option("--activities", o.activities, "activity records CSV");
  cmd->add_option("--profiles", o.profiles, "user profiles CSV");
  cmd->add_option("--truth", o.truth, "pid,label ground truth CSV");
  cmd->add_option("-o,--output-dir", o.output_dir, "artifact directory");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("-j,--threads", o.threads, "worker threads");
  cmd->add_option("--gamma", o.gamma, "topological weight in the combined distance");
  cmd->add_option("--refine-mode", o.refine_mode, "matrix or vector");
  cmd->add_option("--walsh-mode", o.walsh_mode, "integer or one_hot");
  cmd->add_option("--per-spec-count", o.per_spec_count, "synthetic persons per archetype");
  cmd->add_flag("--diagnostics", o.diagnostics, "also write intermediate matrices");
}

RunConfig resolve(const Overrides& o) {
  nlohmann::json j = nlohmann::json::object();
  if (!o.config_path.empty()) j = RunConfig::load(o.config_path).to_json();
  else j = RunConfig{}.to_json();
  if (o.activities) j["input"]["activities"] = *o.activities;
  if (o.profiles) j["input"]["profiles"] = *o.profiles;
  if (o.truth) j["input"]["truth"] = *o.truth;
  if (const char* env = std::getenv("ATPM_OUTPUT_DIR"); env && *env) j["output_dir"] = env;
  if (o.output_dir) j["output_dir"] = *o.output_dir;
  if (o.seed) j["seed"] = *o.seed;
  if (o.threads) j["threads"] = *o.threads;
  if (o.gamma) j["gamma"] = *o.gamma;
  if (o.refine_mode) j["refine_mode"] = *o.refine_mode;
  if (o.walsh_mode) j["walsh_mode"] = *o.walsh_mode;
  if (o.per_spec_count) j["synth"]["per_spec_count"] = *o.per_spec_count;
  if (o.diagnostics) j["diagnostics"] = true;
  auto config = RunConfig::from_json(j);
  config.validate(false);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Activity-travel pattern mining"};
  app.set_version_flag("--version", atpm::pipeline::kVersion);
  app.require_subcommand(1, 1);

  Overrides o;
  auto* synth = app.add_subcommand("synth", "generate a labelled synthetic population");
  auto* ingest = app.add_subcommand("ingest", "clean records and build categorized series");
  auto* cluster = app.add_subcommand("cluster", "distances, clustering and validity");
  auto* report = app.add_subcommand("report", "share tables, representatives, demographics");
  auto* run = app.add_subcommand("run", "ingest, cluster and report with a manifest");
  auto* check = app.add_subcommand("validate-config", "check a config without running");
  for (auto* cmd : {synth, ingest, cluster, report, run, check}) add_common(cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  namespace pl = atpm::pipeline;
  RunConfig config;
  try {
    config = resolve(o);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "validate-config") {
      config.validate(true);
      std::cout << "config ok\n";
    } else if (name == "synth") {
      pl::stage_synth(config);
    } else if (name == "ingest") {
      pl::stage_ingest(config);
    } else if (name == "cluster") {
      pl::stage_cluster(config);
    } else if (name == "report") {
      pl::stage_report(config);
    } else {
      config.validate(true);
      pl::run_pipeline(config);
    }
  } catch (const pl::ConfigError& e) {
    std::cerr << name << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << name << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
