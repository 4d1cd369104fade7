#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "meshroute/hop_log.hpp"
#include "meshroute/metrics.hpp"
#include "meshroute/models.hpp"
#include "meshroute/network.hpp"
#include "meshroute/scenario.hpp"

namespace meshroute {

/// Everything an experiment needs, read from one `key = value` file.
struct PipelineConfig {
  int scenario_count = 10;
  std::uint64_t scenario_seed = 2024;
  int node_count_min = 40;
  int node_count_max = 120;
  ScenarioConfig scenario_template = default_scenario_template();
  SimulationConfig simulation = default_simulation();
  std::uint64_t train_seed = 42;
  double train_fraction = 0.8;
  double bootstrap_level = 0.95;
  int bootstrap_resamples = 10000;
  std::uint64_t bootstrap_seed = 99;

  /// Dense enough that most pairs are connected, with small buffers so that
  /// hub relays saturate under the default workload.
  static ScenarioConfig default_scenario_template();
  static SimulationConfig default_simulation();

  /// Scenario i (1-based): seed derived from scenario_seed, node count spread
  /// evenly over [node_count_min, node_count_max].
  std::vector<ScenarioConfig> scenario_configs() const;
  void validate() const;
};

/// Unknown keys and malformed values raise ConfigError. Blank lines and
/// lines starting with '#' are ignored.
PipelineConfig parse_config(const std::vector<std::string>& lines);
PipelineConfig load_config(const std::filesystem::path& path);
std::string format_config(const PipelineConfig& config);

std::vector<std::filesystem::path> cmd_gen(const PipelineConfig& config, const std::filesystem::path& out_dir);

struct RunReport {
  std::size_t messages = 0;
  std::size_t records = 0;
  MetricsSummary summary;
};

/// Runs every scenario in `scenario_dir` and writes one concatenated log.
RunReport cmd_run(const PipelineConfig& config, const std::filesystem::path& scenario_dir, Mode mode,
                  const std::optional<std::filesystem::path>& bundle_dir, const std::filesystem::path& out_log);

/// Writes dataset_{a,b,c,d}.csv.
void cmd_extract(const std::filesystem::path& log, const std::filesystem::path& out_dir);

ModelBundle cmd_train(const PipelineConfig& config, const std::filesystem::path& log, std::uint64_t seed,
                      const std::filesystem::path& out_bundle);

struct CompareReport {
  std::vector<MetricsSummary> summaries;
  ScenarioMatrix matrix;
  WilcoxonResult wilcoxon;
  std::pair<double, double> ci;
  double mean_diff = 0.0;
  std::string text;
};

/// Writes summary.csv, per_scenario_pdr.csv and stats.txt into `out_dir`.
/// Needs one log per mode over identical scenarios (MismatchError otherwise).
CompareReport cmd_compare(const PipelineConfig& config, const std::vector<std::filesystem::path>& logs,
                          const std::filesystem::path& out_dir);

}  // namespace meshroute
