#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "meshroute/hop_log.hpp"

namespace meshroute {

struct MetricsSummary {
  Mode mode = Mode::baseline;
  double pdr_percent = 0.0;
  // Averages over delivered messages; absent when none were delivered.
  std::optional<double> avg_ttl_left;
  std::optional<double> avg_delay_s;
  std::optional<double> avg_hops;
  int messages_total = 0;
  int messages_delivered = 0;
};

/// Pools every message in `logs` (messages keyed by scenario and message id).
/// Throws DataError for an empty log or one mixing modes.
MetricsSummary aggregate(const std::vector<HopLogRecord>& logs);

/// Scenario id -> summary for that scenario's messages.
std::map<int, MetricsSummary> aggregate_by_scenario(const std::vector<HopLogRecord>& logs);

struct ScenarioMatrix {
  std::vector<int> scenario_ids;
  std::vector<Mode> modes;
  std::vector<std::vector<double>> pdr;  // [scenario][mode]
};

/// Throws MismatchError unless every mode covers the same scenario ids.
ScenarioMatrix per_scenario_table(const std::map<Mode, std::vector<HopLogRecord>>& logs_by_mode);

struct WilcoxonResult {
  double p_value = 1.0;
  double w_plus = 0.0;
  int n = 0;  // non-zero differences
  bool exact = true;
};

/// Two-sided. Exact enumeration over sign assignments for n <= 20 (midranks
/// for ties), normal approximation with continuity correction above.
/// Throws DataError when fewer than 5 differences are non-zero.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> diffs);

/// Percentile interval of the resampled mean.
std::pair<double, double> bootstrap_ci(std::span<const double> diffs, double level = 0.95, int resamples = 10000,
                                       std::uint64_t seed = 0);

std::string format_summary_table(std::span<const MetricsSummary> rows);
std::string format_scenario_matrix(const ScenarioMatrix& m);

}  // namespace meshroute
