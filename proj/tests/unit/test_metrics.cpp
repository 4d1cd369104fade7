#include <doctest.h>

#include <cmath>
#include <random>

#include "meshroute/error.hpp"
#include "meshroute/metrics.hpp"

using namespace meshroute;

namespace {

// One record per message is enough for aggregation.
HopLogRecord message(int scenario, int id, bool delivered, int hops, double delay, int ttl = 10,
                     Mode mode = Mode::baseline) {
  HopLogRecord r;
  r.scenario_id = scenario;
  r.message_id = id;
  r.mode = mode;
  r.hop_index = 0;
  r.ttl_left_at_hop = ttl;
  r.final_delivered = delivered;
  r.total_hops = hops;
  r.total_delay_s = delay;
  return r;
}

double enumerate_p(const std::vector<double>& diffs) {
  std::vector<double> nz;
  for (double d : diffs)
    if (d != 0) nz.push_back(d);
  const std::size_t n = nz.size();
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n; ++i) {
    double below = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(nz[j]) < std::abs(nz[i])) ++below;
      if (std::abs(nz[j]) == std::abs(nz[i])) ++equal;
    }
    ranks[i] = below + (equal + 1) / 2.0;
  }
  const double mean = n * (n + 1) / 4.0;
  double observed = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (nz[i] > 0) observed += ranks[i];
  std::uint64_t extreme = 0;
  for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
    double w = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) w += ranks[i];
    if (std::abs(w - mean) >= std::abs(observed - mean) - 1e-9) ++extreme;
  }
  return static_cast<double>(extreme) / std::ldexp(1.0, static_cast<int>(n));
}

}  // namespace

TEST_CASE("ten messages, seven delivered") {
  std::vector<HopLogRecord> log;
  const int hops[] = {1, 2, 3, 4, 2, 3, 6};
  for (int i = 0; i < 7; ++i) log.push_back(message(1, i + 1, true, hops[i], 10.0 * (i + 1)));
  for (int i = 7; i < 10; ++i) log.push_back(message(1, i + 1, false, 1, 99.0));
  // A second record for a delivered message must not double count it.
  auto extra = message(1, 1, true, 1, 10.0);
  extra.hop_index = 1;
  extra.ttl_left_at_hop = 9;
  log.push_back(extra);

  const auto s = aggregate(log);
  CHECK(s.messages_total == 10);
  CHECK(s.messages_delivered == 7);
  CHECK(s.pdr_percent == doctest::Approx(70.0));
  CHECK(*s.avg_hops == doctest::Approx(3.0));
  CHECK(*s.avg_ttl_left == doctest::Approx(7.0));
  CHECK(*s.avg_delay_s == doctest::Approx(40.0));
}

TEST_CASE("averages are absent when nothing arrives") {
  const auto s = aggregate({message(1, 1, false, 2, 5.0), message(1, 2, false, 1, 5.0)});
  CHECK(s.pdr_percent == 0.0);
  CHECK_FALSE(s.avg_hops.has_value());
  CHECK_FALSE(s.avg_delay_s.has_value());
  CHECK(format_summary_table(std::vector{s}).find("NA,NA,NA") != std::string::npos);
}

TEST_CASE("aggregation rejects empty and mixed logs") {
  CHECK_THROWS_AS(aggregate({}), DataError);
  CHECK_THROWS_AS(aggregate({message(1, 1, true, 1, 1), message(1, 2, true, 1, 1, 10, Mode::abcd)}), DataError);
}

TEST_CASE("pooled PDR is the message-weighted mean of scenario PDRs") {
  std::mt19937_64 gen(5);
  std::vector<HopLogRecord> log;
  for (int sc = 1; sc <= 6; ++sc) {
    const int count = 3 + static_cast<int>(gen() % 20);
    for (int m = 1; m <= count; ++m) log.push_back(message(sc, m, gen() % 3 != 0, 2, 1.0));
  }
  const auto pooled = aggregate(log);
  double weighted = 0;
  int total = 0;
  for (const auto& [id, s] : aggregate_by_scenario(log)) {
    weighted += s.pdr_percent * s.messages_total;
    total += s.messages_total;
  }
  CHECK(total == pooled.messages_total);
  CHECK(weighted / total == doctest::Approx(pooled.pdr_percent).epsilon(1e-12));
}

TEST_CASE("per-scenario matrix requires matching scenarios") {
  std::map<Mode, std::vector<HopLogRecord>> logs;
  logs[Mode::baseline] = {message(1, 1, true, 1, 1), message(2, 1, false, 1, 1)};
  logs[Mode::abcd] = {message(1, 1, true, 1, 1, 10, Mode::abcd), message(2, 1, true, 1, 1, 10, Mode::abcd)};
  const auto m = per_scenario_table(logs);
  CHECK(m.scenario_ids == std::vector<int>{1, 2});
  CHECK(m.pdr[1] == std::vector<double>{0.0, 100.0});
  logs[Mode::abc] = {message(1, 1, true, 1, 1, 10, Mode::abc)};
  CHECK_THROWS_AS(per_scenario_table(logs), MismatchError);
}

TEST_CASE("Wilcoxon exact tails") {
  std::vector<double> up(10);
  for (int i = 0; i < 10; ++i) up[static_cast<std::size_t>(i)] = i + 1;
  const auto r = wilcoxon_signed_rank(up);
  CHECK(r.exact);
  CHECK(r.p_value == doctest::Approx(2.0 / 1024.0).epsilon(1e-12));
  CHECK(r.w_plus == 55.0);

  const std::vector<double> symmetric{1, -1, 2, -2, 3, -3, 4, -4};
  CHECK(wilcoxon_signed_rank(symmetric).p_value >= 0.99);

  CHECK_THROWS_AS(wilcoxon_signed_rank(std::vector<double>(6, 0.0)), DataError);
  CHECK_THROWS_AS(wilcoxon_signed_rank(std::vector<double>{1, 2, 0, 0, 3, 4}), DataError);
}

TEST_CASE("Wilcoxon exact routine matches sign enumeration") {
  std::mt19937_64 gen(17);
  for (int t = 0; t < 200; ++t) {
    const int n = 5 + static_cast<int>(gen() % 8);
    std::vector<double> d;
    while (static_cast<int>(d.size()) < n) {
      const double v = static_cast<double>(static_cast<int>(gen() % 13) - 6);
      if (v != 0) d.push_back(t % 2 ? v : v * 0.37 + 0.001 * static_cast<double>(gen() % 50));
    }
    CHECK(std::abs(wilcoxon_signed_rank(d).p_value - enumerate_p(d)) <= 1e-12);
  }
}

TEST_CASE("Wilcoxon switches to the normal approximation above 20") {
  std::vector<double> d;
  for (int i = 1; i <= 30; ++i) d.push_back(i % 4 == 0 ? -i : i);
  const auto r = wilcoxon_signed_rank(d);
  CHECK_FALSE(r.exact);
  CHECK(r.p_value > 0.0);
  CHECK(r.p_value < 0.05);
}

TEST_CASE("bootstrap interval") {
  const std::vector<double> flat(8, 4.5);
  const auto [lo, hi] = bootstrap_ci(flat, 0.95, 500, 1);
  CHECK(lo == 4.5);
  CHECK(hi == 4.5);

  const std::vector<double> d{1, 5, 2, 8, -1, 3, 4, 7, 0, 6};
  const auto a = bootstrap_ci(d, 0.95, 2000, 9);
  CHECK(a == bootstrap_ci(d, 0.95, 2000, 9));
  CHECK(a.first <= 3.5);
  CHECK(a.second >= 3.5);
  const auto narrow = bootstrap_ci(d, 0.5, 2000, 9);
  CHECK(narrow.first >= a.first);
  CHECK(narrow.second <= a.second);
  CHECK_THROWS_AS(bootstrap_ci(std::vector<double>{1}, 0.95, 10, 0), DataError);
}
