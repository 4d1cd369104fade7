#include "meshroute/hop_log.hpp"

#include <sstream>

#include "meshroute/error.hpp"
#include "meshroute/text_io.hpp"

namespace meshroute {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::baseline:
      return "baseline";
    case Mode::abc:
      return "abc";
    case Mode::abcd:
      return "abcd";
  }
  return "baseline";
}

Mode parse_mode(std::string_view s) {
  if (s == "baseline") return Mode::baseline;
  if (s == "abc") return Mode::abc;
  if (s == "abcd") return Mode::abcd;
  throw ConfigError("unknown routing mode '" + std::string(s) + "' (expected baseline, abc or abcd)");
}

std::string_view to_string(HopOutcome o) {
  switch (o) {
    case HopOutcome::forwarded:
      return "forwarded";
    case HopOutcome::dropped_buffer:
      return "dropped_buffer";
    case HopOutcome::dropped_ttl:
      return "dropped_ttl";
    case HopOutcome::no_route:
      return "no_route";
  }
  return "forwarded";
}

HopOutcome parse_hop_outcome(std::string_view s) {
  if (s == "forwarded") return HopOutcome::forwarded;
  if (s == "dropped_buffer") return HopOutcome::dropped_buffer;
  if (s == "dropped_ttl") return HopOutcome::dropped_ttl;
  if (s == "no_route") return HopOutcome::no_route;
  throw SchemaError("unknown hop outcome '" + std::string(s) + "'");
}

std::optional<FeatureArray> HopLogRecord::chosen_features() const {
  for (std::size_t i = 0; i < candidate_ids.size(); ++i) {
    if (candidate_ids[i] == chosen_id) return candidate_features.at(i);
  }
  return std::nullopt;
}

double quantise_log_value(double v) { return text::parse_double(text::fixed(v, 6), "log value"); }

std::string format_hop_log_row(const HopLogRecord& r) {
  std::ostringstream out;
  out << r.scenario_id << ',' << r.message_id << ',' << to_string(r.mode) << ',' << r.hop_index << ',' << r.from_id
      << ',' << r.to_id << ',' << r.ttl_left_at_hop << ',' << text::fixed(r.buffer_ratio_at_to, 6) << ','
      << text::fixed(r.distance_to_target_m, 6) << ',' << text::fixed(r.hop_delay_s, 6) << ',';
  for (std::size_t i = 0; i < r.candidate_ids.size(); ++i) out << (i ? "|" : "") << r.candidate_ids[i];
  out << ',';
  for (std::size_t i = 0; i < r.candidate_features.size(); ++i) {
    if (i) out << '|';
    for (std::size_t f = 0; f < kFeatureCount; ++f) out << (f ? ";" : "") << text::fixed(r.candidate_features[i][f], 6);
  }
  out << ',' << r.chosen_id << ',';
  if (r.score_breakdown) {
    const auto& s = *r.score_breakdown;
    out << text::fixed(s.a, 6) << ':' << text::fixed(s.b, 6) << ':' << text::fixed(s.c, 6) << ':'
        << text::fixed(s.d, 6) << ':' << text::fixed(s.combined, 6);
  }
  out << ',' << to_string(r.hop_outcome) << ',' << (r.final_delivered ? 1 : 0) << ','
      << text::fixed(r.total_delay_s, 6) << ',' << r.total_hops;
  return out.str();
}

std::string format_hop_log(const std::vector<HopLogRecord>& records) {
  std::string out(kHopLogHeader);
  out += '\n';
  for (const auto& r : records) {
    out += format_hop_log_row(r);
    out += '\n';
  }
  return out;
}

std::vector<HopLogRecord> parse_hop_log(const std::vector<std::string>& lines) {
  if (lines.empty() || text::trim(lines.front()) != kHopLogHeader) {
    throw SchemaError("hop log header does not match the expected column list");
  }
  std::vector<HopLogRecord> out;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (text::trim(lines[n]).empty()) continue;
    const std::string row = "hop log row " + std::to_string(n);
    const auto f = text::split(lines[n], ',');
    if (f.size() != 18) throw SchemaError(row + ": expected 18 fields");
    HopLogRecord r;
    r.scenario_id = static_cast<int>(text::parse_int(f[0], row));
    r.message_id = static_cast<int>(text::parse_int(f[1], row));
    r.mode = parse_mode(f[2]);
    r.hop_index = static_cast<int>(text::parse_int(f[3], row));
    r.from_id = static_cast<int>(text::parse_int(f[4], row));
    r.to_id = static_cast<int>(text::parse_int(f[5], row));
    r.ttl_left_at_hop = static_cast<int>(text::parse_int(f[6], row));
    r.buffer_ratio_at_to = text::parse_double(f[7], row);
    r.distance_to_target_m = text::parse_double(f[8], row);
    r.hop_delay_s = text::parse_double(f[9], row);
    if (!f[10].empty()) {
      for (const auto& id : text::split(f[10], '|')) r.candidate_ids.push_back(static_cast<int>(text::parse_int(id, row)));
    }
    if (!f[11].empty()) {
      for (const auto& vec : text::split(f[11], '|')) {
        const auto parts = text::split(vec, ';');
        if (parts.size() != kFeatureCount) throw SchemaError(row + ": candidate feature vector needs 8 values");
        FeatureArray a{};
        for (std::size_t k = 0; k < kFeatureCount; ++k) a[k] = text::parse_double(parts[k], row);
        r.candidate_features.push_back(a);
      }
    }
    if (r.candidate_features.size() != r.candidate_ids.size()) {
      throw SchemaError(row + ": candidate_ids and candidate_features differ in length");
    }
    r.chosen_id = static_cast<int>(text::parse_int(f[12], row));
    if (!f[13].empty()) {
      const auto parts = text::split(f[13], ':');
      if (parts.size() != 5) throw SchemaError(row + ": score_breakdown needs a:b:c:d:combined");
      ScoreBreakdown s;
      s.candidate_id = r.chosen_id;
      s.a = text::parse_double(parts[0], row);
      s.b = text::parse_double(parts[1], row);
      s.c = text::parse_double(parts[2], row);
      s.d = text::parse_double(parts[3], row);
      s.combined = text::parse_double(parts[4], row);
      r.score_breakdown = s;
    }
    r.hop_outcome = parse_hop_outcome(f[14]);
    r.final_delivered = text::parse_int(f[15], row) != 0;
    r.total_delay_s = text::parse_double(f[16], row);
    r.total_hops = static_cast<int>(text::parse_int(f[17], row));
    out.push_back(std::move(r));
  }
  return out;
}

void save_hop_log(const std::vector<HopLogRecord>& records, const std::string& path) {
  text::write_atomic(path, format_hop_log(records));
}

std::vector<HopLogRecord> load_hop_log(const std::string& path) { return parse_hop_log(text::read_lines(path)); }

}  // namespace meshroute
