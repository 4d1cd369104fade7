#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "meshroute/features.hpp"

namespace meshroute {

enum class Mode { baseline, abc, abcd };

std::string_view to_string(Mode m);
Mode parse_mode(std::string_view s);

/// `no_route` marks the single record emitted for a sender with no neighbours
/// at all, and ML hops left with no eligible candidate.
enum class HopOutcome { forwarded, dropped_buffer, dropped_ttl, no_route };

std::string_view to_string(HopOutcome o);
HopOutcome parse_hop_outcome(std::string_view s);

struct ScoreBreakdown {
  int candidate_id = 0;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
  double combined = 0.0;

  bool operator==(const ScoreBreakdown&) const = default;
};

/// One forwarding decision. Real-valued fields are stored already rounded to
/// the 6 decimals the log file keeps, so a parsed log equals the in-memory one.
struct HopLogRecord {
  int scenario_id = 0;
  int message_id = 0;
  Mode mode = Mode::baseline;
  int hop_index = 0;
  int from_id = 0;
  int to_id = 0;  // 0 when no neighbour was chosen
  int ttl_left_at_hop = 0;
  double buffer_ratio_at_to = 0.0;
  double distance_to_target_m = 0.0;
  double hop_delay_s = 0.0;
  std::vector<int> candidate_ids;
  std::vector<FeatureArray> candidate_features;  // parallel to candidate_ids
  int chosen_id = 0;
  std::optional<ScoreBreakdown> score_breakdown;
  HopOutcome hop_outcome = HopOutcome::forwarded;
  bool final_delivered = false;
  double total_delay_s = 0.0;
  int total_hops = 0;

  /// Features of chosen_id at decision time, if it is among the candidates.
  std::optional<FeatureArray> chosen_features() const;

  bool operator==(const HopLogRecord&) const = default;
};

inline constexpr std::string_view kHopLogHeader =
    "scenario_id,message_id,mode,hop_index,from_id,to_id,ttl_left_at_hop,buffer_ratio_at_to,"
    "distance_to_target_m,hop_delay_s,candidate_ids,candidate_features,chosen_id,score_breakdown,"
    "hop_outcome,final_delivered,total_delay_s,total_hops";

/// Rounds to the 6-decimal precision of every real-valued log column.
double quantise_log_value(double v);

std::string format_hop_log(const std::vector<HopLogRecord>& records);
std::string format_hop_log_row(const HopLogRecord& r);
std::vector<HopLogRecord> parse_hop_log(const std::vector<std::string>& lines);

void save_hop_log(const std::vector<HopLogRecord>& records, const std::string& path);
std::vector<HopLogRecord> load_hop_log(const std::string& path);

}  // namespace meshroute
