#include "meshroute/aodv.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

namespace meshroute::aodv {

std::optional<std::vector<int>> bfs_route(int sender, int receiver, const Adjacency& adjacency, int ttl) {
  if (sender == receiver || ttl < 1) return std::nullopt;
  std::unordered_map<int, int> parent;
  std::unordered_map<int, int> depth;
  std::deque<int> frontier{sender};
  parent[sender] = sender;
  depth[sender] = 0;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop_front();
    if (depth[u] >= ttl) continue;
    auto it = adjacency.find(u);
    if (it == adjacency.end()) continue;
    for (int v : it->second) {  // ascending by construction
      if (parent.contains(v)) continue;
      parent[v] = u;
      depth[v] = depth[u] + 1;
      if (v == receiver) {
        std::vector<int> path{v};
        while (path.back() != sender) path.push_back(parent[path.back()]);
        std::reverse(path.begin(), path.end());
        return path;
      }
      frontier.push_back(v);
    }
  }
  return std::nullopt;
}

void update_routing_tables(std::span<const int> path, std::map<int, NodeState>& nodes) {
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    auto it = nodes.find(path[i]);
    if (it == nodes.end()) continue;
    for (std::size_t j = i + 1; j < path.size(); ++j) it->second.routing_table[path[j]] = path[i + 1];
  }
}

std::vector<HopLogRecord> log_partial_failure(const Message& message, const ScenarioState& state, Mode mode,
                                              int scenario_id) {
  const auto& scenario = *state.scenario;
  const auto& sender = state.node(message.sender_id);
  const auto& receiver = scenario.device(message.receiver_id);
  const auto& neighbours = state.adjacency.at(message.sender_id);

  HopLogRecord base;
  base.scenario_id = scenario_id;
  base.message_id = message.message_id;
  base.mode = mode;
  base.hop_index = 0;
  base.from_id = message.sender_id;
  base.ttl_left_at_hop = message.ttl_initial;
  base.hop_outcome = HopOutcome::dropped_ttl;
  base.final_delivered = false;

  if (neighbours.empty()) {
    base.hop_outcome = HopOutcome::no_route;
    return {base};
  }

  const double at_s = message.created_at;
  for (int n : neighbours) {
    const auto f = extract_features(sender, state.node(n), message, receiver, at_s).to_array();
    FeatureArray q{};
    for (std::size_t k = 0; k < kFeatureCount; ++k) q[k] = quantise_log_value(f[k]);
    base.candidate_ids.push_back(n);
    base.candidate_features.push_back(q);
  }

  std::vector<std::pair<double, int>> by_distance;
  for (int n : neighbours) by_distance.emplace_back(distance_between(sender.spec, scenario.device(n)), n);
  std::sort(by_distance.begin(), by_distance.end());

  std::vector<HopLogRecord> out;
  for (std::size_t i = 0; i < std::min<std::size_t>(2, by_distance.size()); ++i) {
    const int n = by_distance[i].second;
    HopLogRecord r = base;
    r.to_id = n;
    r.chosen_id = n;
    r.buffer_ratio_at_to = quantise_log_value(state.node(n).buffer_ratio(at_s));
    r.distance_to_target_m = quantise_log_value(distance_between(scenario.device(n), receiver));
    out.push_back(std::move(r));
  }
  return out;
}

std::optional<int> fallback_aodv_selection(int current, int receiver, std::span<const int> candidates,
                                           const Adjacency& adjacency, int ttl_left, const Scenario& scenario) {
  if (candidates.empty()) return std::nullopt;
  if (auto path = bfs_route(current, receiver, adjacency, ttl_left)) {
    const int next = (*path)[1];
    if (std::find(candidates.begin(), candidates.end(), next) != candidates.end()) return next;
  }
  const auto& target = scenario.device(receiver);
  std::optional<int> best;
  double best_distance = 0.0;
  for (int c : candidates) {
    const double d = distance_between(scenario.device(c), target);
    if (!best || d < best_distance || (d == best_distance && c < *best)) {
      best = c;
      best_distance = d;
    }
  }
  return best;
}

}  // namespace meshroute::aodv
