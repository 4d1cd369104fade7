#include <doctest.h>

#include <cmath>

#include "meshroute/error.hpp"
#include "meshroute/network.hpp"
#include "meshroute/rng.hpp"

using namespace meshroute;

namespace {

Scenario line_scenario(const std::vector<std::pair<double, double>>& points, int capacity = 5) {
  Scenario s;
  s.scenario_id = 1;
  int id = 1;
  for (auto [x, y] : points) {
    DeviceSpec d;
    d.device_id = id++;
    d.x_position = x;
    d.y_position = y;
    d.battery_level = d.signal_quality = d.success_rate = 0.5;
    d.priority_tolerance = d.uptime_ratio = 0.5;
    d.buffer_capacity = capacity;
    s.devices.push_back(d);
  }
  s.config.node_count = static_cast<int>(points.size());
  return s;
}

std::vector<int> brute_neighbors(const Scenario& s, int id, double r) {
  std::vector<int> out;
  const auto& me = s.device(id);
  for (const auto& d : s.devices) {
    if (d.device_id == id) continue;
    const double dx = d.x_position - me.x_position, dy = d.y_position - me.y_position;
    if (dx * dx + dy * dy <= r * r) out.push_back(d.device_id);
  }
  return out;
}

}  // namespace

TEST_CASE("neighbour discovery matches a brute-force scan") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    ScenarioConfig c;
    c.seed = seed;
    c.node_count = 60;
    c.area_width = 150 + 10.0 * static_cast<double>(seed);
    c.area_height = 200;
    const auto s = generate_scenario(c);
    const auto adj = build_adjacency(s, 50.0);
    for (const auto& d : s.devices) {
      const auto expect = brute_neighbors(s, d.device_id, 50.0);
      CHECK(adj.at(d.device_id) == expect);
      CHECK(discover_neighbors(d.device_id, s, 50.0) == expect);
    }
  }
}

TEST_CASE("neighbour boundary is inclusive and unknown ids fail") {
  const auto s = line_scenario({{0, 0}, {50, 0}, {100.000001, 0}});
  CHECK(discover_neighbors(1, s, 50.0) == std::vector<int>{2});
  CHECK(discover_neighbors(2, s, 50.0) == std::vector<int>{1});
  CHECK_THROWS(discover_neighbors(9, s, 50.0));
}

TEST_CASE("capability score") {
  NodeState n(line_scenario({{0, 0}}).devices[0], 0.0, 0.9);
  n.spec.battery_level = n.spec.signal_quality = n.spec.success_rate = 1.0;
  CHECK(capability_score(n, {0.4, 0.4, 0.2}) == doctest::Approx(1.0));
  CHECK(capability_score(n, {0.1, 0.1, 0.8}) == doctest::Approx(1.0));
  n.spec.battery_level = n.spec.signal_quality = n.spec.success_rate = 0.0;
  CHECK(capability_score(n, {0.4, 0.4, 0.2}) == 0.0);
  n.spec.battery_level = n.spec.signal_quality = n.spec.success_rate = 0.5;
  CHECK(capability_score(n, {0.2, 0.5, 0.3}) == doctest::Approx(0.5));
}

TEST_CASE("hop delay closed forms") {
  SimulationConfig cfg;
  NodeState best(line_scenario({{0, 0}}).devices[0], 0.0, 0.9);
  best.spec.battery_level = best.spec.signal_quality = best.spec.success_rate = 1.0;
  CHECK(hop_delay(best, 0.0, cfg, 0.0) == cfg.base_hop_delay_s);

  NodeState worst(line_scenario({{0, 0}}, 1).devices[0], 0.0, 0.9);
  worst.spec.battery_level = worst.spec.signal_quality = worst.spec.success_rate = 0.0;
  REQUIRE(worst.try_enqueue(0.0));
  CHECK(hop_delay(worst, cfg.radius_m, cfg, 0.0) ==
        doctest::Approx(cfg.base_hop_delay_s * 2 * 2 + cfg.queue_penalty_s));
}

TEST_CASE("hop delay is monotone in capability, buffer and distance") {
  SimulationConfig cfg;
  Rng rng(12);
  auto make = [](double cap_value, int used, int capacity) {
    DeviceSpec d;
    d.device_id = 1;
    d.battery_level = d.signal_quality = d.success_rate = cap_value;
    d.buffer_capacity = capacity;
    NodeState n(d, 0.0, 0.9);
    for (int i = 0; i < used; ++i) n.try_enqueue(0.0);
    return n;
  };
  for (int i = 0; i < 1000; ++i) {
    const double c1 = rng.uniform01(), c2 = rng.uniform01();
    const double d1 = rng.uniform(0, cfg.radius_m), d2 = rng.uniform(0, cfg.radius_m);
    const int cap = 1 + static_cast<int>(rng.uniform_int(0, 20));
    const int u1 = static_cast<int>(rng.uniform_int(0, cap)), u2 = static_cast<int>(rng.uniform_int(0, cap));
    const auto lo_cap = make(std::min(c1, c2), u1, cap), hi_cap = make(std::max(c1, c2), u1, cap);
    CHECK(hop_delay(hi_cap, d1, cfg, 0.0) <= hop_delay(lo_cap, d1, cfg, 0.0));
    const auto lo_buf = make(c1, std::min(u1, u2), cap), hi_buf = make(c1, std::max(u1, u2), cap);
    CHECK(hop_delay(lo_buf, d1, cfg, 0.0) <= hop_delay(hi_buf, d1, cfg, 0.0));
    CHECK(hop_delay(lo_cap, std::min(d1, d2), cfg, 0.0) <= hop_delay(lo_cap, std::max(d1, d2), cfg, 0.0));
    CHECK(hop_delay(lo_cap, d1, cfg, 0.0) > 0.0);
  }
}

TEST_CASE("buffer admission respects capacity") {
  auto s = line_scenario({{0, 0}}, 1);
  NodeState one(s.devices[0]);
  CHECK(one.try_enqueue(0.0));
  CHECK_FALSE(one.try_enqueue(0.0));
  one.release(5.0);
  CHECK(one.try_enqueue(5.0));

  s.devices[0].buffer_capacity = 30;
  NodeState full(s.devices[0]);
  for (int i = 0; i < 30; ++i) REQUIRE(full.try_enqueue(0.0));
  CHECK(full.buffer_used(0.0) == 30);
  CHECK(full.buffer_ratio(0.0) == 1.0);
  CHECK_FALSE(full.try_enqueue(0.0));
}

TEST_CASE("out-of-order admissions never overfill a node") {
  Rng rng(4);
  DeviceSpec d;
  d.device_id = 1;
  d.buffer_capacity = 3;
  for (int trial = 0; trial < 200; ++trial) {
    NodeState n(d);
    for (int i = 0; i < 40; ++i) {
      const double arrive = rng.uniform(0, 100);
      if (n.try_enqueue(arrive)) n.release(arrive + rng.uniform(0.1, 30));
    }
    CHECK(n.max_occupancy() <= 3);
  }
}

TEST_CASE("success and uptime blend with the device priors") {
  DeviceSpec d;
  d.device_id = 1;
  d.success_rate = 0.5;
  d.uptime_ratio = 0.8;
  NodeState n(d, 10.0, 0.9);
  CHECK(n.success_rate() == doctest::Approx(0.5));
  for (int i = 0; i < 10; ++i) n.record_attempt(true);
  CHECK(n.success_rate() == doctest::Approx(15.0 / 20.0));
  CHECK(n.deliveries_succeeded <= n.deliveries_attempted);
  CHECK(n.uptime_ratio() == doctest::Approx(0.8));
  n.record_availability(10.0, true);
  n.record_availability(10.0, false);
  CHECK(n.uptime_ratio() == doctest::Approx(0.9 * 0.8 + 0.1 * 0.5));
}

TEST_CASE("feature extraction reads origin history and candidate state") {
  const auto s = line_scenario({{0, 0}, {30, 40}, {30, 80}});
  ScenarioState st(s, SimulationConfig{});
  Message m{1, 1, 3, 10, 2, 0.0};
  const auto f = extract_features(st.node(1), st.node(2), m, s.device(3), 0.0);
  CHECK(f.ttl_left == 8);
  CHECK(f.hop_count == 2);
  CHECK(f.distance_to_target == 40.0);
  CHECK(f.success_rate_origin == 0.5);
  CHECK(f.buffer_ratio == 0.0);
}

TEST_CASE("simulation config validation") {
  SimulationConfig c;
  CHECK_NOTHROW(c.validate());
  c.radius_m = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.capability_weights = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.ttl_initial = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
