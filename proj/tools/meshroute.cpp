// Command-line front end: gen, run, extract, train, compare.
#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

#include "meshroute/error.hpp"
#include "meshroute/pipeline.hpp"
#include "meshroute/text_io.hpp"

namespace fs = std::filesystem;
using namespace meshroute;

namespace {

PipelineConfig config_from(const std::string& path) { return path.empty() ? PipelineConfig{} : load_config(path); }

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const MissingDependencyError*>(&e)) return 3;
  if (dynamic_cast<const IoError*>(&e)) return 3;
  if (dynamic_cast<const MismatchError*>(&e)) return 5;
  return 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"meshroute: mesh routing simulator with ML fusion"};
  app.require_subcommand(1);

  std::string config_path, out, bundle, scenarios, mode = "baseline";
  std::vector<std::string> logs;
  std::optional<std::uint64_t> seed;

  auto* gen = app.add_subcommand("gen", "generate the scenario suite");
  gen->add_option("--config", config_path, "key = value config file");
  gen->add_option("--seed", seed, "override scenario_seed");
  gen->add_option("--out", out, "output directory")->required();

  auto* run = app.add_subcommand("run", "route every message of every scenario");
  run->add_option("--config", config_path, "key = value config file");
  run->add_option("--scenarios", scenarios, "scenario directory")->required();
  run->add_option("--mode", mode, "baseline | abc | abcd");
  run->add_option("--bundle", bundle, "trained model bundle directory");
  run->add_option("--seed", seed, "override workload_seed");
  run->add_option("--out", out, "output hop log")->required();

  auto* extract = app.add_subcommand("extract", "write the four training datasets");
  extract->add_option("--log", logs, "baseline hop log")->required()->expected(1);
  extract->add_option("--out", out, "output directory")->required();

  auto* train = app.add_subcommand("train", "train the model bundle from a baseline log");
  train->add_option("--config", config_path, "key = value config file");
  train->add_option("--log", logs, "baseline hop log")->required()->expected(1);
  train->add_option("--seed", seed, "override train_seed");
  train->add_option("--out", out, "bundle directory")->required();

  auto* compare = app.add_subcommand("compare", "summarise and test logs of all three modes");
  compare->add_option("--config", config_path, "key = value config file");
  compare->add_option("--log", logs, "hop logs (one per mode)")->required();
  compare->add_option("--out", out, "report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    auto config = config_from(config_path);
    if (gen->parsed()) {
      if (seed) config.scenario_seed = *seed;
      for (const auto& p : cmd_gen(config, out)) std::cout << p.string() << '\n';
    } else if (run->parsed()) {
      if (seed) config.simulation.workload_seed = *seed;
      const auto m = parse_mode(mode);
      std::optional<fs::path> b;
      if (!bundle.empty()) b = bundle;
      const auto rep = cmd_run(config, scenarios, m, b, out);
      std::cout << "mode " << to_string(m) << ": " << rep.messages << " messages, " << rep.records << " records, PDR "
                << text::fixed(rep.summary.pdr_percent, 2) << "%\n";
    } else if (extract->parsed()) {
      cmd_extract(logs.front(), out);
    } else if (train->parsed()) {
      const auto b = cmd_train(config, logs.front(), seed.value_or(config.train_seed), out);
      std::cout << format_validation_metrics(b);
    } else if (compare->parsed()) {
      std::vector<fs::path> paths(logs.begin(), logs.end());
      std::cout << cmd_compare(config, paths, out).text;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}
