#include <doctest.h>

#include <algorithm>
#include <limits>

#include "meshroute/aodv.hpp"
#include "meshroute/rng.hpp"

using namespace meshroute;

namespace {

Scenario grid_scenario(const std::vector<std::pair<double, double>>& points) {
  Scenario s;
  s.scenario_id = 1;
  int id = 1;
  for (auto [x, y] : points) {
    DeviceSpec d;
    d.device_id = id++;
    d.x_position = x;
    d.y_position = y;
    d.battery_level = d.signal_quality = d.success_rate = d.priority_tolerance = d.uptime_ratio = 0.5;
    d.buffer_capacity = 4;
    s.devices.push_back(d);
  }
  s.config.node_count = static_cast<int>(points.size());
  return s;
}

Adjacency random_graph(Rng& rng, int n, double p) {
  Adjacency adj;
  for (int i = 1; i <= n; ++i) adj[i];
  for (int i = 1; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      if (rng.uniform01() < p) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    }
  }
  for (auto& [k, v] : adj) std::sort(v.begin(), v.end());
  return adj;
}

}  // namespace

TEST_CASE("direct neighbours route in one hop") {
  Adjacency adj{{1, {2}}, {2, {1}}};
  CHECK(aodv::bfs_route(1, 2, adj, 10) == std::vector<int>{1, 2});
}

TEST_CASE("ttl bounds the route") {
  Adjacency adj{{1, {2}}, {2, {1, 3}}, {3, {2, 4}}, {4, {3}}};
  CHECK_FALSE(aodv::bfs_route(1, 4, adj, 2).has_value());
  CHECK(aodv::bfs_route(1, 4, adj, 3) == std::vector<int>{1, 2, 3, 4});
}

TEST_CASE("bfs matches all-pairs shortest paths on random graphs") {
  Rng rng(2024);
  const int inf = std::numeric_limits<int>::max() / 4;
  for (int g = 0; g < 1000; ++g) {
    const int n = 2 + static_cast<int>(rng.uniform_int(0, 10));
    const auto adj = random_graph(rng, n, rng.uniform(0.1, 0.6));
    std::vector<std::vector<int>> dist(n + 1, std::vector<int>(n + 1, inf));
    for (int i = 1; i <= n; ++i) {
      dist[i][i] = 0;
      for (int j : adj.at(i)) dist[i][j] = 1;
    }
    for (int k = 1; k <= n; ++k)
      for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) dist[i][j] = std::min(dist[i][j], dist[i][k] + dist[k][j]);
    const int ttl = 1 + static_cast<int>(rng.uniform_int(0, 6));
    for (int s = 1; s <= n; ++s) {
      for (int r = 1; r <= n; ++r) {
        if (s == r) continue;
        const auto path = aodv::bfs_route(s, r, adj, ttl);
        if (dist[s][r] <= ttl) {
          REQUIRE(path.has_value());
          CHECK(static_cast<int>(path->size()) - 1 == dist[s][r]);
          for (std::size_t i = 0; i + 1 < path->size(); ++i) {
            const auto& nb = adj.at((*path)[i]);
            CHECK(std::binary_search(nb.begin(), nb.end(), (*path)[i + 1]));
          }
        } else {
          CHECK_FALSE(path.has_value());
        }
      }
    }
  }
}

TEST_CASE("routing tables point at the next node on the path") {
  const auto s = grid_scenario({{0, 0}, {40, 0}, {80, 0}});
  ScenarioState st(s, SimulationConfig{});
  const std::vector<int> path{1, 2, 3};
  aodv::update_routing_tables(path, st.nodes);
  CHECK(st.node(1).routing_table == std::map<int, int>{{2, 2}, {3, 2}});
  CHECK(st.node(2).routing_table == std::map<int, int>{{3, 3}});
  CHECK(st.node(3).routing_table.empty());

  ScenarioState st2(s, SimulationConfig{});
  const std::vector<int> short_path{1, 2};
  aodv::update_routing_tables(short_path, st2.nodes);
  CHECK(st2.node(1).routing_table == std::map<int, int>{{2, 2}});
}

TEST_CASE("partial failure targets the two nearest neighbours") {
  // sender 1 with neighbours at 10, 20, 30 m; receiver 5 far away
  const auto s = grid_scenario({{0, 0}, {10, 0}, {0, 20}, {-30, 0}, {400, 400}});
  ScenarioState st(s, SimulationConfig{});
  Message m{1, 1, 5, 10, 0, 0.0};
  const auto recs = aodv::log_partial_failure(m, st, Mode::baseline, 1);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].to_id == 2);
  CHECK(recs[1].to_id == 3);
  for (const auto& r : recs) {
    CHECK(r.hop_outcome == HopOutcome::dropped_ttl);
    CHECK_FALSE(r.final_delivered);
    CHECK(r.candidate_ids == std::vector<int>{2, 3, 4});
  }

  const auto one = grid_scenario({{0, 0}, {10, 0}, {400, 400}});
  ScenarioState st1(one, SimulationConfig{});
  CHECK(aodv::log_partial_failure({1, 1, 3, 10, 0, 0.0}, st1, Mode::baseline, 1).size() == 1);

  const auto lonely = grid_scenario({{0, 0}, {400, 400}});
  ScenarioState st0(lonely, SimulationConfig{});
  const auto iso = aodv::log_partial_failure({1, 1, 2, 10, 0, 0.0}, st0, Mode::baseline, 1);
  REQUIRE(iso.size() == 1);
  CHECK(iso[0].hop_outcome == HopOutcome::no_route);
  CHECK(iso[0].candidate_ids.empty());
}

TEST_CASE("fallback prefers the bfs next hop, then greedy distance") {
  // 1 - 2 - 3 chain; 4 sits near the receiver but is not connected onward
  const auto s = grid_scenario({{0, 0}, {40, 0}, {80, 0}, {20, 30}});
  const auto adj = build_adjacency(s, 50.0);
  const std::vector<int> both{2, 4};
  CHECK(aodv::fallback_aodv_selection(1, 3, both, adj, 5, s) == 2);

  const std::vector<int> only4{4};
  CHECK(aodv::fallback_aodv_selection(1, 3, only4, adj, 5, s) == 4);

  // no route: greedy by distance to receiver (40 m vs 25 m)
  const auto near = grid_scenario({{0, 0}, {0, 45}, {0, 30}, {0, 70}});
  const Adjacency cut{{1, {2, 3}}, {2, {1}}, {3, {1}}, {4, {}}};
  const std::vector<int> cands{2, 3};
  CHECK(aodv::fallback_aodv_selection(1, 4, cands, cut, 5, near) == 2);
  CHECK_FALSE(aodv::fallback_aodv_selection(1, 4, {}, cut, 5, near).has_value());
}

TEST_CASE("fallback output is always a candidate") {
  Rng rng(8);
  for (int t = 0; t < 300; ++t) {
    ScenarioConfig c;
    c.seed = static_cast<std::uint64_t>(t);
    c.node_count = 12;
    c.area_width = c.area_height = 120;
    const auto s = generate_scenario(c);
    const auto adj = build_adjacency(s, 50.0);
    const int cur = 1 + static_cast<int>(rng.uniform_int(0, 11));
    int rec = 1 + static_cast<int>(rng.uniform_int(0, 11));
    if (rec == cur) rec = rec % 12 + 1;
    std::vector<int> cands;
    for (int n : adj.at(cur))
      if (rng.uniform01() < 0.6) cands.push_back(n);
    const auto pick = aodv::fallback_aodv_selection(cur, rec, cands, adj, 3, s);
    if (cands.empty()) {
      CHECK_FALSE(pick.has_value());
    } else {
      REQUIRE(pick.has_value());
      CHECK(std::find(cands.begin(), cands.end(), *pick) != cands.end());
    }
  }
}
