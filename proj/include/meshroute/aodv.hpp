#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "meshroute/hop_log.hpp"
#include "meshroute/network.hpp"

namespace meshroute::aodv {

/// Minimum-hop path sender..receiver using at most `ttl` hops, or nullopt.
/// Neighbour lists are expanded in ascending id order, so among equal-length
/// paths the lexicographically smallest (by discovery order) is returned.
std::optional<std::vector<int>> bfs_route(int sender, int receiver, const Adjacency& adjacency, int ttl);

/// For every node path[i] and destination path[j], j > i:
/// routing_table[path[j]] = path[i + 1].
void update_routing_tables(std::span<const int> path, std::map<int, NodeState>& nodes);

/// Failed-attempt records toward the sender's two nearest neighbours (ties by
/// lower id), or one no_route record with no candidates for an isolated sender.
/// Attempts carry zero delay.
std::vector<HopLogRecord> log_partial_failure(const Message& message, const ScenarioState& state, Mode mode,
                                              int scenario_id);

/// Next hop on a TTL-feasible BFS route if it is an eligible candidate,
/// otherwise the candidate closest to the receiver (ties by lower id).
std::optional<int> fallback_aodv_selection(int current, int receiver, std::span<const int> candidates,
                                           const Adjacency& adjacency, int ttl_left, const Scenario& scenario);

}  // namespace meshroute::aodv
