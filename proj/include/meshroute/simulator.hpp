#pragma once

#include <string_view>
#include <vector>

#include "meshroute/hop_log.hpp"
#include "meshroute/models.hpp"
#include "meshroute/network.hpp"

namespace meshroute {

enum class FailureReason { none, no_route, ttl_expired, buffer_drop };

std::string_view to_string(FailureReason r);

struct DeliveryOutcome {
  int message_id = 0;
  bool delivered = false;
  std::vector<int> path;
  double total_delay_s = 0.0;
  int ttl_left_final = 0;
  FailureReason failure_reason = FailureReason::none;
};

struct DeliveryResult {
  DeliveryOutcome outcome;
  std::vector<HopLogRecord> records;
};

/// Routes one message to completion, mutating buffers, counters and routing
/// tables in `state`. ML modes need a bundle (ConfigError otherwise).
DeliveryResult run_delivery(const Message& message, ScenarioState& state, Mode mode, const ModelBundle* bundle);

/// Seeded distinct (sender, receiver) pairs, created message_interval_s apart.
std::vector<Message> generate_workload(const Scenario& scenario, const SimulationConfig& config);

struct ScenarioRun {
  std::vector<HopLogRecord> records;
  std::vector<DeliveryOutcome> outcomes;
  /// Highest concurrent occupancy seen at each node, keyed by device id.
  std::map<int, int> peak_occupancy;
};

ScenarioRun run_scenario(const Scenario& scenario, const SimulationConfig& config, Mode mode,
                         const ModelBundle* bundle);

}  // namespace meshroute
