#pragma once

#include <array>
#include <limits>
#include <map>
#include <vector>

#include "meshroute/features.hpp"
#include "meshroute/scenario.hpp"

namespace meshroute {

/// Linear fusion coefficients, applied as
///   combined = w_d*D + w_a*A - w_b*B - w_c*(C / delay_divisor).
struct FusionWeights {
  enum class Variant { eq6, abc, abcd };

  double w_d = 0.4;
  double w_a = 0.4;
  double w_b = 0.1;
  double w_c = 0.1;
  double delay_divisor = 100.0;
  Variant variant = Variant::abcd;

  static FusionWeights eq6() { return {1.0, 1.0, 1.0, 1.0, 100.0, Variant::eq6}; }
  static FusionWeights abc() { return {0.0, 0.5, 0.25, 0.25, 100.0, Variant::abc}; }
  static FusionWeights abcd() { return {0.4, 0.4, 0.1, 0.1, 100.0, Variant::abcd}; }

  bool operator==(const FusionWeights&) const = default;
};

struct FusionSettings {
  int k = 3;
  double threshold = 0.0;
  FusionWeights abc_weights = FusionWeights::abc();
  FusionWeights abcd_weights = FusionWeights::abcd();
};

struct SimulationConfig {
  double radius_m = 50.0;
  int ttl_initial = 10;
  int messages_per_scenario = 100;
  double base_hop_delay_s = 10.0;
  double queue_penalty_s = 20.0;
  std::array<double, 3> capability_weights{0.4, 0.4, 0.2};  // battery, signal, success
  std::uint64_t workload_seed = 7;
  /// Spacing between consecutive message creation times.
  double message_interval_s = 1.0;
  /// The device's success_rate prior counts as this many attempts.
  double prior_pseudo_attempts = 10.0;
  /// Weight of the device's uptime prior when blending with observed uptime.
  double uptime_prior_weight = 0.9;
  FusionSettings fusion{};

  /// Throws ConfigError on the first violated invariant.
  void validate() const;
};

/// One buffer slot held from arrive_s until depart_s (infinite while the
/// message still sits at the node).
struct Residence {
  double arrive_s = 0.0;
  double depart_s = std::numeric_limits<double>::infinity();
};

struct NodeState {
  explicit NodeState(DeviceSpec device, double pseudo_attempts = 10.0, double uptime_prior = 0.9);

  DeviceSpec spec;
  std::vector<Residence> residences;
  int deliveries_attempted = 0;
  int deliveries_succeeded = 0;
  double active_time = 0.0;
  double total_time = 0.0;
  std::map<int, int> routing_table;  // receiver id -> next hop id
  double pseudo_attempts = 10.0;
  double uptime_prior_weight = 0.9;

  /// Slots held at `at_s` or reserved for later, capped at capacity. Counting
  /// every residence still open at or after `at_s` keeps admissions made out
  /// of time order from ever overfilling the buffer.
  int buffer_used(double at_s) const;
  double buffer_ratio(double at_s) const;

  /// Admits the message if a slot is free at `at_s`.
  bool try_enqueue(double at_s);
  /// Closes the open residence (the message departed at `at_s`).
  void release(double at_s);

  /// Largest number of residences overlapping any instant.
  int max_occupancy() const;

  /// Eq. (3) over real attempts plus the prior's pseudo-attempts.
  double success_rate() const;
  /// Eq. (4) blended with the device prior.
  double uptime_ratio() const;

  void record_attempt(bool delivered);
  /// An admission probe observes the node for `duration_s`; it counts as
  /// active unless the buffer was full.
  void record_availability(double duration_s, bool active);
};

struct Message {
  int message_id = 0;
  int sender_id = 0;
  int receiver_id = 0;
  int ttl_initial = 10;
  int hop_count = 0;
  double created_at = 0.0;
};

using Adjacency = std::map<int, std::vector<int>>;

/// Uniform grid over device positions with cell size equal to the radius.
class SpatialIndex {
 public:
  SpatialIndex(const Scenario& scenario, double radius_m);
  /// All other devices within radius (inclusive), ascending id.
  std::vector<int> neighbors_of(int device_id) const;

 private:
  const Scenario& scenario_;
  double radius_m_;
  std::map<std::pair<long, long>, std::vector<int>> cells_;  // device indices
  std::pair<long, long> cell_of(double x, double y) const;
};

std::vector<int> discover_neighbors(int node_id, const Scenario& scenario, double radius_m);
Adjacency build_adjacency(const Scenario& scenario, double radius_m);

double distance_between(const DeviceSpec& a, const DeviceSpec& b);

double capability_score(const NodeState& state, const std::array<double, 3>& weights);

/// base * (1 + d/R) * (2 - capability(to)) + queue_penalty * buffer_ratio(to).
double hop_delay(const NodeState& to, double distance_m, const SimulationConfig& config, double at_s);

/// Mutable per-run state for one scenario.
struct ScenarioState {
  ScenarioState(const Scenario& scenario, SimulationConfig config);

  const Scenario* scenario;
  SimulationConfig config;
  Adjacency adjacency;
  std::map<int, NodeState> nodes;

  NodeState& node(int id);
  const NodeState& node(int id) const;
};

/// Features of `candidate` as a forwarder for `message` sitting at `origin`
/// at time `at_s`. Pure: reads state only.
FeatureVector extract_features(const NodeState& origin, const NodeState& candidate, const Message& message,
                               const DeviceSpec& receiver, double at_s);

}  // namespace meshroute
