#include "meshroute/network.hpp"

#include <algorithm>
#include <cmath>

#include "meshroute/error.hpp"

namespace meshroute {

void SimulationConfig::validate() const {
  if (!(radius_m > 0.0)) throw ConfigError("radius_m must be > 0");
  if (ttl_initial < 1) throw ConfigError("ttl_initial must be >= 1");
  if (messages_per_scenario < 0) throw ConfigError("messages_per_scenario must be >= 0");
  if (!(base_hop_delay_s > 0.0)) throw ConfigError("base_hop_delay_s must be > 0");
  if (queue_penalty_s < 0.0) throw ConfigError("queue_penalty_s must be >= 0");
  double sum = 0.0;
  for (double w : capability_weights) {
    if (w < 0.0) throw ConfigError("capability weights must be >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("capability weights must sum to 1");
  if (message_interval_s < 0.0) throw ConfigError("message_interval_s must be >= 0");
  if (prior_pseudo_attempts < 0.0) throw ConfigError("prior_pseudo_attempts must be >= 0");
  if (uptime_prior_weight < 0.0 || uptime_prior_weight > 1.0) throw ConfigError("uptime_prior_weight must be in [0,1]");
  if (fusion.k < 1) throw ConfigError("fusion k must be >= 1");
  for (const auto* w : {&fusion.abc_weights, &fusion.abcd_weights}) {
    if (!(w->delay_divisor > 0.0)) throw ConfigError("fusion delay_divisor must be > 0");
  }
}

NodeState::NodeState(DeviceSpec device, double pseudo, double uptime_prior)
    : spec(device), pseudo_attempts(pseudo), uptime_prior_weight(uptime_prior) {}

int NodeState::buffer_used(double at_s) const {
  const auto open = std::count_if(residences.begin(), residences.end(),
                                  [at_s](const Residence& r) { return r.depart_s > at_s; });
  return static_cast<int>(std::min<long>(open, spec.buffer_capacity));
}

double NodeState::buffer_ratio(double at_s) const { return meshroute::buffer_ratio(buffer_used(at_s), spec.buffer_capacity); }

bool NodeState::try_enqueue(double at_s) {
  if (buffer_used(at_s) >= spec.buffer_capacity) return false;
  residences.push_back({at_s, std::numeric_limits<double>::infinity()});
  return true;
}

void NodeState::release(double at_s) {
  for (auto it = residences.rbegin(); it != residences.rend(); ++it) {
    if (std::isinf(it->depart_s)) {
      it->depart_s = std::max(at_s, it->arrive_s);
      return;
    }
  }
}

int NodeState::max_occupancy() const {
  std::vector<std::pair<double, int>> events;
  events.reserve(residences.size() * 2);
  for (const auto& r : residences) {
    events.emplace_back(r.arrive_s, +1);
    events.emplace_back(r.depart_s, -1);
  }
  // Departures sort before arrivals at the same instant (half-open intervals).
  std::sort(events.begin(), events.end());
  int current = 0, best = 0;
  for (const auto& [t, delta] : events) {
    current += delta;
    best = std::max(best, current);
  }
  return best;
}

double NodeState::success_rate() const {
  return success_rate_origin(deliveries_succeeded + pseudo_attempts * spec.success_rate,
                             deliveries_attempted + pseudo_attempts, spec.success_rate);
}

double NodeState::uptime_ratio() const {
  const double observed = meshroute::uptime_ratio(active_time, total_time, spec.uptime_ratio);
  return uptime_prior_weight * spec.uptime_ratio + (1.0 - uptime_prior_weight) * observed;
}

void NodeState::record_attempt(bool delivered) {
  ++deliveries_attempted;
  if (delivered) ++deliveries_succeeded;
}

void NodeState::record_availability(double duration_s, bool active) {
  total_time += duration_s;
  if (active) active_time += duration_s;
}

SpatialIndex::SpatialIndex(const Scenario& scenario, double radius_m) : scenario_(scenario), radius_m_(radius_m) {
  for (std::size_t i = 0; i < scenario.devices.size(); ++i) {
    const auto& d = scenario.devices[i];
    cells_[cell_of(d.x_position, d.y_position)].push_back(static_cast<int>(i));
  }
}

std::pair<long, long> SpatialIndex::cell_of(double x, double y) const {
  return {static_cast<long>(std::floor(x / radius_m_)), static_cast<long>(std::floor(y / radius_m_))};
}

std::vector<int> SpatialIndex::neighbors_of(int device_id) const {
  const auto& self = scenario_.device(device_id);
  const auto [cx, cy] = cell_of(self.x_position, self.y_position);
  const double r2 = radius_m_ * radius_m_;
  std::vector<int> out;
  for (long gx = cx - 1; gx <= cx + 1; ++gx) {
    for (long gy = cy - 1; gy <= cy + 1; ++gy) {
      auto it = cells_.find({gx, gy});
      if (it == cells_.end()) continue;
      for (int idx : it->second) {
        const auto& other = scenario_.devices[static_cast<std::size_t>(idx)];
        if (other.device_id == device_id) continue;
        const double dx = other.x_position - self.x_position;
        const double dy = other.y_position - self.y_position;
        if (dx * dx + dy * dy <= r2) out.push_back(other.device_id);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> discover_neighbors(int node_id, const Scenario& scenario, double radius_m) {
  return SpatialIndex(scenario, radius_m).neighbors_of(node_id);
}

Adjacency build_adjacency(const Scenario& scenario, double radius_m) {
  const SpatialIndex index(scenario, radius_m);
  Adjacency adj;
  for (const auto& d : scenario.devices) adj[d.device_id] = index.neighbors_of(d.device_id);
  return adj;
}

double distance_between(const DeviceSpec& a, const DeviceSpec& b) {
  return distance_to_target(a.x_position, a.y_position, b.x_position, b.y_position);
}

double capability_score(const NodeState& state, const std::array<double, 3>& weights) {
  return weights[0] * state.spec.battery_level + weights[1] * state.spec.signal_quality +
         weights[2] * state.success_rate();
}

double hop_delay(const NodeState& to, double distance_m, const SimulationConfig& config, double at_s) {
  const double capability = capability_score(to, config.capability_weights);
  return config.base_hop_delay_s * (1.0 + distance_m / config.radius_m) * (2.0 - capability) +
         config.queue_penalty_s * to.buffer_ratio(at_s);
}

ScenarioState::ScenarioState(const Scenario& s, SimulationConfig c)
    : scenario(&s), config(c), adjacency(build_adjacency(s, c.radius_m)) {
  config.validate();
  validate_scenario(s);
  for (const auto& d : s.devices) nodes.emplace(d.device_id, NodeState(d, c.prior_pseudo_attempts, c.uptime_prior_weight));
}

NodeState& ScenarioState::node(int id) {
  auto it = nodes.find(id);
  if (it == nodes.end()) throw ValidationError("unknown device id " + std::to_string(id));
  return it->second;
}

const NodeState& ScenarioState::node(int id) const {
  auto it = nodes.find(id);
  if (it == nodes.end()) throw ValidationError("unknown device id " + std::to_string(id));
  return it->second;
}

FeatureVector extract_features(const NodeState& origin, const NodeState& candidate, const Message& message,
                               const DeviceSpec& receiver, double at_s) {
  FeatureVector v;
  v.ttl_left = ttl_left(message.ttl_initial, message.hop_count);
  v.hop_count = message.hop_count;
  v.distance_to_target = distance_to_target(candidate.spec.x_position, candidate.spec.y_position,
                                            receiver.x_position, receiver.y_position);
  v.success_rate_origin = origin.success_rate();
  v.priority_tolerance = candidate.spec.priority_tolerance;
  v.uptime_ratio = origin.uptime_ratio();
  v.buffer_ratio = candidate.buffer_ratio(at_s);
  v.device_type_encoded = encode_device_type(candidate.spec.device_type);
  return v;
}

}  // namespace meshroute
