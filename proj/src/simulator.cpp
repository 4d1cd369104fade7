#include "meshroute/simulator.hpp"

#include <algorithm>
#include <set>

#include "meshroute/aodv.hpp"
#include "meshroute/error.hpp"
#include "meshroute/fusion.hpp"
#include "meshroute/rng.hpp"

namespace meshroute {

std::string_view to_string(FailureReason r) {
  switch (r) {
    case FailureReason::none: return "none";
    case FailureReason::no_route: return "no_route";
    case FailureReason::ttl_expired: return "ttl_expired";
    case FailureReason::buffer_drop: return "buffer_drop";
  }
  return "none";
}

namespace {

FeatureArray quantised_features(const ScenarioState& state, int from, int candidate, const Message& message,
                                const DeviceSpec& receiver, double at_s) {
  auto f = extract_features(state.node(from), state.node(candidate), message, receiver, at_s).to_array();
  for (auto& v : f) v = quantise_log_value(v);
  return f;
}

class Delivery {
 public:
  Delivery(const Message& message, ScenarioState& state, Mode mode, const ModelBundle* bundle)
      : msg_(message),
        state_(state),
        mode_(mode),
        bundle_(bundle),
        scenario_(*state.scenario),
        receiver_(scenario_.device(message.receiver_id)) {
    outcome_.message_id = message.message_id;
    outcome_.path.push_back(message.sender_id);
    now_ = message.created_at;
  }

  DeliveryResult run() {
    if (mode_ == Mode::baseline) {
      run_baseline();
    } else {
      run_fusion();
    }
    finish();
    return {std::move(outcome_), std::move(records_)};
  }

 private:
  const Message msg_;
  Message live_ = msg_;
  ScenarioState& state_;
  Mode mode_;
  const ModelBundle* bundle_;
  const Scenario& scenario_;
  const DeviceSpec& receiver_;
  DeliveryOutcome outcome_;
  std::vector<HopLogRecord> records_;
  double now_ = 0.0;

  int current() const { return outcome_.path.back(); }

  HopLogRecord base_record() const {
    HopLogRecord r;
    r.scenario_id = scenario_.scenario_id;
    r.message_id = msg_.message_id;
    r.mode = mode_;
    r.hop_index = live_.hop_count;
    r.from_id = current();
    r.ttl_left_at_hop = ttl_left(live_.ttl_initial, live_.hop_count);
    return r;
  }

  void fill_candidates(HopLogRecord& r, const std::vector<int>& candidates) const {
    r.candidate_ids = candidates;
    r.candidate_features.clear();
    for (int c : candidates) r.candidate_features.push_back(quantised_features(state_, current(), c, live_, receiver_, now_));
  }

  /// Moves the message one hop to `next`; false if next's buffer rejected it.
  bool forward(int next, HopLogRecord record) {
    const int from = current();
    auto& to = state_.node(next);
    const double distance = distance_between(scenario_.device(from), to.spec);
    const double delay = quantise_log_value(hop_delay(to, distance, state_.config, now_));
    const double arrival = now_ + delay;

    record.to_id = next;
    record.chosen_id = next;
    record.buffer_ratio_at_to = quantise_log_value(to.buffer_ratio(now_));
    record.distance_to_target_m = quantise_log_value(distance_between(to.spec, receiver_));
    record.hop_delay_s = delay;

    bool admitted = true;
    if (next != msg_.receiver_id) {
      admitted = to.try_enqueue(arrival);
      to.record_availability(delay, admitted);
    }
    if (from != msg_.sender_id) state_.node(from).release(arrival);
    if (!admitted) {
      record.hop_outcome = HopOutcome::dropped_buffer;
      records_.push_back(std::move(record));
      outcome_.failure_reason = FailureReason::buffer_drop;
      return false;
    }
    record.hop_outcome = HopOutcome::forwarded;
    records_.push_back(std::move(record));
    outcome_.path.push_back(next);
    outcome_.total_delay_s += delay;
    ++live_.hop_count;
    now_ = arrival;
    return true;
  }

  void run_baseline() {
    const auto route = aodv::bfs_route(msg_.sender_id, msg_.receiver_id, state_.adjacency, msg_.ttl_initial);
    if (!route) {
      records_ = aodv::log_partial_failure(msg_, state_, mode_, scenario_.scenario_id);
      outcome_.failure_reason = FailureReason::no_route;
      return;
    }
    aodv::update_routing_tables(*route, state_.nodes);
    for (std::size_t i = 1; i < route->size(); ++i) {
      auto r = base_record();
      fill_candidates(r, state_.adjacency.at(current()));
      if (!forward((*route)[i], std::move(r))) return;
    }
  }

  void run_fusion() {
    if (bundle_ == nullptr || !bundle_->trained) {
      throw ConfigError(std::string("mode ") + std::string(to_string(mode_)) + " requires a trained model bundle");
    }
    const auto& settings = state_.config.fusion;
    const auto& weights = mode_ == Mode::abc ? settings.abc_weights : settings.abcd_weights;
    std::set<int> visited{msg_.sender_id};

    while (current() != msg_.receiver_id) {
      if (live_.hop_count >= live_.ttl_initial) {
        auto r = base_record();
        r.hop_outcome = HopOutcome::dropped_ttl;
        records_.push_back(std::move(r));
        outcome_.failure_reason = FailureReason::ttl_expired;
        return;
      }
      const auto& neighbours = state_.adjacency.at(current());
      auto r = base_record();

      if (std::binary_search(neighbours.begin(), neighbours.end(), msg_.receiver_id)) {
        fill_candidates(r, {msg_.receiver_id});
        forward(msg_.receiver_id, std::move(r));
        continue;
      }

      std::vector<int> eligible;
      bool any_unvisited = false;
      for (int n : neighbours) {
        if (visited.contains(n)) continue;
        any_unvisited = true;
        const auto& ns = state_.node(n);
        if (ns.buffer_used(now_) < ns.spec.buffer_capacity) eligible.push_back(n);
      }
      if (eligible.empty()) {
        fill_candidates(r, neighbours);
        r.hop_outcome = any_unvisited ? HopOutcome::dropped_buffer : HopOutcome::no_route;
        outcome_.failure_reason = any_unvisited ? FailureReason::buffer_drop : FailureReason::no_route;
        records_.push_back(std::move(r));
        return;
      }

      fill_candidates(r, eligible);
      const auto decision =
          fusion::select_forwarder(eligible, r.candidate_features, *bundle_, settings.k, settings.threshold, weights);
      int next = 0;
      if (decision.chosen) {
        next = *decision.chosen;
        r.score_breakdown = *decision.chosen_breakdown();
      } else {
        const int ttl_left_now = ttl_left(live_.ttl_initial, live_.hop_count);
        next = *aodv::fallback_aodv_selection(current(), msg_.receiver_id, eligible, state_.adjacency, ttl_left_now,
                                              scenario_);
      }
      if (r.score_breakdown) {
        auto& s = *r.score_breakdown;
        s.a = quantise_log_value(s.a);
        s.b = quantise_log_value(s.b);
        s.c = quantise_log_value(s.c);
        s.d = quantise_log_value(s.d);
        s.combined = quantise_log_value(s.combined);
      }
      visited.insert(next);
      if (!forward(next, std::move(r))) return;
    }
  }

  void finish() {
    outcome_.delivered = current() == msg_.receiver_id;
    if (!outcome_.delivered && current() != msg_.sender_id) state_.node(current()).release(now_);
    if (outcome_.delivered) outcome_.failure_reason = FailureReason::none;
    outcome_.total_delay_s = quantise_log_value(outcome_.total_delay_s);
    const int hops = static_cast<int>(outcome_.path.size()) - 1;
    outcome_.ttl_left_final = msg_.ttl_initial - hops;

    for (std::size_t i = 0; i + 1 < outcome_.path.size(); ++i) {
      state_.node(outcome_.path[i]).record_attempt(outcome_.delivered);
    }
    if (outcome_.path.size() == 1) state_.node(msg_.sender_id).record_attempt(false);

    for (auto& r : records_) {
      r.final_delivered = outcome_.delivered;
      r.total_delay_s = outcome_.total_delay_s;
      r.total_hops = hops;
    }
  }
};

}  // namespace

DeliveryResult run_delivery(const Message& message, ScenarioState& state, Mode mode, const ModelBundle* bundle) {
  if (message.sender_id == message.receiver_id) throw ValidationError("message sender equals receiver");
  return Delivery(message, state, mode, bundle).run();
}

std::vector<Message> generate_workload(const Scenario& scenario, const SimulationConfig& config) {
  std::vector<Message> out;
  const auto n = static_cast<std::int64_t>(scenario.devices.size());
  if (n < 2) throw ValidationError("a workload needs at least two devices");
  Rng rng(derive_seed(config.workload_seed, static_cast<std::uint64_t>(scenario.scenario_id)));
  for (int i = 0; i < config.messages_per_scenario; ++i) {
    const auto s = rng.uniform_int(0, n - 1);
    auto r = rng.uniform_int(0, n - 2);
    if (r >= s) ++r;
    Message m;
    m.message_id = i + 1;
    m.sender_id = scenario.devices[static_cast<std::size_t>(s)].device_id;
    m.receiver_id = scenario.devices[static_cast<std::size_t>(r)].device_id;
    m.ttl_initial = config.ttl_initial;
    m.created_at = quantise_log_value(i * config.message_interval_s);
    out.push_back(m);
  }
  return out;
}

ScenarioRun run_scenario(const Scenario& scenario, const SimulationConfig& config, Mode mode,
                         const ModelBundle* bundle) {
  config.validate();
  if (mode != Mode::baseline && (bundle == nullptr || !bundle->trained)) {
    throw ConfigError(std::string("mode ") + std::string(to_string(mode)) + " requires a trained model bundle");
  }
  ScenarioState state(scenario, config);
  ScenarioRun run;
  for (const auto& m : generate_workload(scenario, config)) {
    auto result = run_delivery(m, state, mode, bundle);
    run.records.insert(run.records.end(), std::make_move_iterator(result.records.begin()),
                       std::make_move_iterator(result.records.end()));
    run.outcomes.push_back(std::move(result.outcome));
  }
  for (const auto& [id, node] : state.nodes) run.peak_occupancy[id] = node.max_occupancy();
  return run;
}

}  // namespace meshroute
