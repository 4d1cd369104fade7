#include <doctest.h>

#include "meshroute/error.hpp"
#include "meshroute/hop_log.hpp"

using namespace meshroute;

namespace {

HopLogRecord sample() {
  HopLogRecord r;
  r.scenario_id = 2;
  r.message_id = 17;
  r.mode = Mode::abcd;
  r.hop_index = 1;
  r.from_id = 4;
  r.to_id = 9;
  r.ttl_left_at_hop = 9;
  r.buffer_ratio_at_to = 0.25;
  r.distance_to_target_m = 31.415926;
  r.hop_delay_s = 12.5;
  r.candidate_ids = {3, 9};
  r.candidate_features = {{9, 1, 40.0, 0.5, 0.1, 0.9, 0.0, 0}, {9, 1, 31.415926, 0.5, 0.7, 0.9, 0.25, 2}};
  r.chosen_id = 9;
  r.score_breakdown = ScoreBreakdown{9, 0.9, 2.0, 30.0, 0.8, 0.47};
  r.hop_outcome = HopOutcome::forwarded;
  r.final_delivered = true;
  r.total_delay_s = 40.25;
  r.total_hops = 3;
  return r;
}

}  // namespace

TEST_CASE("log round trip preserves every field") {
  auto a = sample();
  auto b = sample();
  b.mode = Mode::baseline;
  b.score_breakdown.reset();
  b.hop_outcome = HopOutcome::dropped_buffer;
  b.final_delivered = false;
  auto c = sample();
  c.candidate_ids.clear();
  c.candidate_features.clear();
  c.score_breakdown.reset();
  c.to_id = 0;
  c.chosen_id = 0;
  c.hop_outcome = HopOutcome::no_route;
  const std::vector<HopLogRecord> records{a, b, c};
  const auto text = format_hop_log(records);
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  CHECK(lines.front() == kHopLogHeader);
  CHECK(parse_hop_log(lines) == records);
}

TEST_CASE("candidate ids are pipe-joined and breakdowns colon-joined") {
  const auto row = format_hop_log_row(sample());
  CHECK(row.find(",3|9,") != std::string::npos);
  CHECK(row.find("0.900000:2.000000:30.000000:0.800000:0.470000") != std::string::npos);
}

TEST_CASE("chosen features come from the matching candidate") {
  const auto r = sample();
  REQUIRE(r.chosen_features().has_value());
  CHECK((*r.chosen_features())[2] == 31.415926);
  auto s = r;
  s.chosen_id = 77;
  CHECK_FALSE(s.chosen_features().has_value());
}

TEST_CASE("bad header or row is rejected") {
  CHECK_THROWS_AS(parse_hop_log({"nope"}), SchemaError);
  CHECK_THROWS(parse_hop_log({std::string(kHopLogHeader), "1,2,3"}));
  CHECK_THROWS_AS(parse_mode("fast"), ConfigError);
}

TEST_CASE("quantisation keeps six decimals") {
  CHECK(quantise_log_value(1.23456789) == 1.234568);
  CHECK(quantise_log_value(-0.0000001) == 0.0);
}
