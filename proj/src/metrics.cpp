#include "meshroute/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "meshroute/error.hpp"
#include "meshroute/rng.hpp"
#include "meshroute/text_io.hpp"

namespace meshroute {

namespace {

struct MessageFacts {
  bool delivered = false;
  int hops = 0;
  double delay = 0.0;
  int ttl_initial = 0;
};

}  // namespace

MetricsSummary aggregate(const std::vector<HopLogRecord>& logs) {
  if (logs.empty()) throw DataError("cannot aggregate an empty log");
  std::map<std::pair<int, int>, MessageFacts> messages;
  const Mode mode = logs.front().mode;
  for (const auto& r : logs) {
    if (r.mode != mode) throw DataError("log mixes routing modes");
    auto& m = messages[{r.scenario_id, r.message_id}];
    m.delivered = r.final_delivered;
    m.hops = r.total_hops;
    m.delay = r.total_delay_s;
    m.ttl_initial = std::max(m.ttl_initial, r.ttl_left_at_hop + r.hop_index);
  }

  MetricsSummary s;
  s.mode = mode;
  s.messages_total = static_cast<int>(messages.size());
  double ttl = 0.0, delay = 0.0, hops = 0.0;
  for (const auto& [key, m] : messages) {
    if (!m.delivered) continue;
    ++s.messages_delivered;
    ttl += m.ttl_initial - m.hops;
    delay += m.delay;
    hops += m.hops;
  }
  s.pdr_percent = 100.0 * s.messages_delivered / s.messages_total;
  if (s.messages_delivered > 0) {
    const double n = s.messages_delivered;
    s.avg_ttl_left = ttl / n;
    s.avg_delay_s = delay / n;
    s.avg_hops = hops / n;
  }
  return s;
}

std::map<int, MetricsSummary> aggregate_by_scenario(const std::vector<HopLogRecord>& logs) {
  std::map<int, std::vector<HopLogRecord>> split;
  for (const auto& r : logs) split[r.scenario_id].push_back(r);
  std::map<int, MetricsSummary> out;
  for (const auto& [id, records] : split) out[id] = aggregate(records);
  return out;
}

ScenarioMatrix per_scenario_table(const std::map<Mode, std::vector<HopLogRecord>>& logs_by_mode) {
  if (logs_by_mode.empty()) throw DataError("no logs to tabulate");
  ScenarioMatrix m;
  std::vector<std::map<int, MetricsSummary>> per_mode;
  for (const auto& [mode, logs] : logs_by_mode) {
    m.modes.push_back(mode);
    per_mode.push_back(aggregate_by_scenario(logs));
  }
  for (const auto& [id, s] : per_mode.front()) m.scenario_ids.push_back(id);
  for (std::size_t i = 1; i < per_mode.size(); ++i) {
    std::vector<int> ids;
    for (const auto& [id, s] : per_mode[i]) ids.push_back(id);
    if (ids != m.scenario_ids) {
      throw MismatchError("mode " + std::string(to_string(m.modes[i])) + " covers different scenarios than mode " +
                          std::string(to_string(m.modes.front())));
    }
  }
  for (int id : m.scenario_ids) {
    std::vector<double> row;
    for (const auto& pm : per_mode) row.push_back(pm.at(id).pdr_percent);
    m.pdr.push_back(std::move(row));
  }
  return m;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> diffs) {
  std::vector<double> nz;
  for (double d : diffs) {
    if (d != 0.0) nz.push_back(d);
  }
  if (nz.empty()) throw DataError("all paired differences are zero");
  if (nz.size() < 5) throw DataError("Wilcoxon test needs at least 5 non-zero differences");

  const std::size_t n = nz.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return std::abs(nz[a]) < std::abs(nz[b]); });
  // Doubled midranks keep everything integral.
  std::vector<long> rank2(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(nz[order[j + 1]]) == std::abs(nz[order[i]])) ++j;
    const long doubled = static_cast<long>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = doubled;
    i = j + 1;
  }

  WilcoxonResult res;
  res.n = static_cast<int>(n);
  long w2 = 0, total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total2 += rank2[i];
    if (nz[i] > 0) w2 += rank2[i];
  }
  res.w_plus = w2 / 2.0;

  if (n <= 20) {
    // Count sign assignments by doubled W+.
    std::vector<double> ways(static_cast<std::size_t>(total2) + 1, 0.0);
    ways[0] = 1.0;
    for (long r : rank2) {
      for (long s = total2; s >= r; --s) ways[static_cast<std::size_t>(s)] += ways[static_cast<std::size_t>(s - r)];
    }
    const double all = std::ldexp(1.0, static_cast<int>(n));
    const long mirror = total2 - w2;
    const long lo = std::min(w2, mirror), hi = std::max(w2, mirror);
    double tail = 0.0;
    for (long s = 0; s <= total2; ++s) {
      if (s <= lo || s >= hi) tail += ways[static_cast<std::size_t>(s)];
    }
    res.p_value = std::min(1.0, tail / all);
    res.exact = true;
    return res;
  }

  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(nz[order[j + 1]]) == std::abs(nz[order[i]])) ++j;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  const double dev = std::max(0.0, std::abs(res.w_plus - mean) - 0.5);
  const double z = dev / std::sqrt(var);
  res.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  res.exact = false;
  return res;
}

std::pair<double, double> bootstrap_ci(std::span<const double> diffs, double level, int resamples, std::uint64_t seed) {
  if (diffs.size() < 2) throw DataError("bootstrap needs at least 2 differences");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must be in (0,1)");
  if (resamples < 1) throw ConfigError("resamples must be >= 1");
  Rng rng(seed);
  const auto n = static_cast<std::int64_t>(diffs.size());
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (auto& m : means) {
    double sum = 0.0;
    for (std::int64_t i = 0; i < n; ++i) sum += diffs[static_cast<std::size_t>(rng.uniform_int(0, n - 1))];
    m = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double alpha = (1.0 - level) / 2.0;
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(resamples - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const auto j = std::min(i + 1, means.size() - 1);
    const double frac = pos - static_cast<double>(i);
    return means[i] + frac * (means[j] - means[i]);
  };
  return {at(alpha), at(1.0 - alpha)};
}

namespace {
std::string opt(const std::optional<double>& v) { return v ? text::fixed(*v, 2) : "NA"; }
}  // namespace

std::string format_summary_table(std::span<const MetricsSummary> rows) {
  std::ostringstream out;
  out << "mode,pdr_percent,avg_ttl_left,avg_delay_s,avg_hops,messages_total,messages_delivered\n";
  for (const auto& s : rows) {
    out << to_string(s.mode) << ',' << text::fixed(s.pdr_percent, 2) << ',' << opt(s.avg_ttl_left) << ','
        << opt(s.avg_delay_s) << ',' << opt(s.avg_hops) << ',' << s.messages_total << ',' << s.messages_delivered
        << '\n';
  }
  return out.str();
}

std::string format_scenario_matrix(const ScenarioMatrix& m) {
  std::ostringstream out;
  out << "scenario_id";
  for (auto mode : m.modes) out << ',' << to_string(mode);
  out << '\n';
  for (std::size_t i = 0; i < m.scenario_ids.size(); ++i) {
    out << m.scenario_ids[i];
    for (double v : m.pdr[i]) out << ',' << text::fixed(v, 2);
    out << '\n';
  }
  return out.str();
}

}  // namespace meshroute
