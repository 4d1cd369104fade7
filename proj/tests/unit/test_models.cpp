#include <doctest.h>

#include <filesystem>

#include "meshroute/error.hpp"
#include "meshroute/models.hpp"
#include "meshroute/pipeline.hpp"
#include "meshroute/simulator.hpp"
#include "meshroute/text_io.hpp"

using namespace meshroute;
namespace fs = std::filesystem;

namespace {

HopLogRecord hop(int message, int index, double delay, bool delivered, int total_hops,
                 HopOutcome outcome = HopOutcome::forwarded) {
  HopLogRecord r;
  r.scenario_id = 1;
  r.message_id = message;
  r.hop_index = index;
  r.from_id = 10 + index;
  r.to_id = 11 + index;
  r.chosen_id = 11 + index;
  r.ttl_left_at_hop = 10 - index;
  r.candidate_ids = {11 + index, 50 + index};
  r.candidate_features = {FeatureArray{static_cast<double>(10 - index), static_cast<double>(index), 5, 0.5, 0.5, 0.5, 0, 0},
                          FeatureArray{static_cast<double>(10 - index), static_cast<double>(index), 90, 0.5, 0.5, 0.5, 0, 1}};
  r.hop_delay_s = delay;
  r.hop_outcome = outcome;
  r.final_delivered = delivered;
  r.total_hops = total_hops;
  return r;
}

std::vector<HopLogRecord> small_baseline_log() {
  PipelineConfig c;
  c.scenario_count = 3;
  c.node_count_min = 50;
  c.node_count_max = 70;
  c.simulation.messages_per_scenario = 80;
  std::vector<HopLogRecord> all;
  int id = 1;
  for (const auto& sc : c.scenario_configs()) {
    auto run = run_scenario(generate_scenario(sc, id++), c.simulation, Mode::baseline, nullptr);
    all.insert(all.end(), run.records.begin(), run.records.end());
  }
  return all;
}

BundleSpecs quick_specs() {
  auto s = BundleSpecs::defaults();
  s.a.hyperparameters["n_estimators"] = "30";
  s.b.hyperparameters["n_estimators"] = "30";
  s.d.hyperparameters["n_estimators"] = "20";
  return s;
}

}  // namespace

TEST_CASE("dataset A: one row per forwarded hop labelled by delivery") {
  const std::vector<HopLogRecord> delivered{hop(1, 0, 10, true, 2), hop(1, 1, 15, true, 2)};
  const auto a = extract_dataset_a(delivered);
  CHECK(a.size() == 2);
  CHECK(a.y == std::vector<double>{1, 1});
  CHECK(a.row(0)[2] == 5.0);  // chosen candidate's distance

  std::vector<HopLogRecord> expired{hop(2, 0, 10, false, 3), hop(2, 1, 10, false, 3), hop(2, 2, 10, false, 3),
                                    hop(2, 3, 0, false, 3, HopOutcome::dropped_ttl)};
  const auto e = extract_dataset_a(expired);
  CHECK(e.size() == 3);
  CHECK(e.y == std::vector<double>{0, 0, 0});
}

TEST_CASE("dataset B: remaining hops from delivered messages only") {
  std::vector<HopLogRecord> log{hop(1, 0, 10, true, 3), hop(1, 1, 10, true, 3), hop(1, 2, 10, true, 3),
                                hop(2, 0, 10, false, 1), hop(2, 1, 0, false, 1, HopOutcome::dropped_buffer)};
  const auto b = extract_dataset_b(log);
  CHECK(b.y == std::vector<double>{3, 2, 1});
}

TEST_CASE("dataset C: remaining delay telescopes to the total") {
  std::vector<HopLogRecord> log{hop(1, 0, 10, true, 2), hop(1, 1, 15, true, 2)};
  for (auto& r : log) r.total_delay_s = 25;
  const auto c = extract_dataset_c(log);
  CHECK(c.y == std::vector<double>{25, 15});
  CHECK(c.y.front() == log.front().total_delay_s);
}

TEST_CASE("dataset D: one positive per delivered hop") {
  auto r = hop(1, 0, 10, true, 1);
  r.candidate_ids = {3, 4, 5, 6};
  r.chosen_id = 5;
  r.candidate_features.assign(4, FeatureArray{});
  const auto d = extract_dataset_d({r});
  CHECK(d.size() == 4);
  CHECK(d.y == std::vector<double>{0, 0, 1, 0});

  auto lone = hop(2, 0, 10, true, 1);
  lone.candidate_ids = {7};
  lone.chosen_id = 7;
  lone.candidate_features.assign(1, FeatureArray{});
  CHECK(extract_dataset_d({lone}).y == std::vector<double>{1});
  CHECK(extract_dataset_d({hop(3, 0, 10, false, 1)}).size() == 0);
}

TEST_CASE("extraction from a simulated log obeys the count identities") {
  const auto log = small_baseline_log();
  const auto a = extract_dataset_a(log);
  std::size_t forwarded = 0, delivered_hops = 0, candidates = 0;
  for (const auto& r : log) {
    if (r.hop_outcome != HopOutcome::forwarded) continue;
    ++forwarded;
    if (r.final_delivered) {
      ++delivered_hops;
      candidates += r.candidate_ids.size();
    }
  }
  CHECK(a.size() == forwarded);
  const auto d = extract_dataset_d(log);
  CHECK(d.size() == candidates);
  CHECK(std::count(d.y.begin(), d.y.end(), 1.0) == static_cast<long>(delivered_hops));
  const double mean_candidates = static_cast<double>(candidates) / static_cast<double>(delivered_hops);
  CHECK(static_cast<double>(delivered_hops) / static_cast<double>(d.size()) <= 1.0 / mean_candidates + 1e-12);
  for (double y : extract_dataset_b(log).y) {
    CHECK(y >= 1);
    CHECK(y <= 10);
  }
  CHECK(dataset_csv(a) == dataset_csv(extract_dataset_a(log)));
}

TEST_CASE("single-class data cannot train a bundle") {
  const std::vector<HopLogRecord> only_good{hop(1, 0, 10, true, 2), hop(1, 1, 15, true, 2)};
  CHECK_THROWS_AS(train_bundle(only_good, 42), DataError);
  CHECK_THROWS_AS(train_bundle({}, 42), DataError);
}

TEST_CASE("bundle training, prediction bounds and persistence") {
  const auto log = small_baseline_log();
  const auto bundle = train_bundle(log, 42, quick_specs());
  const auto again = train_bundle(log, 42, quick_specs());
  CHECK(bundle.model_a == again.model_a);
  CHECK(bundle.model_d == again.model_d);
  CHECK(bundle.log_digest == text::fnv1a_hex(format_hop_log(log)));

  for (const auto& r : log) {
    for (const auto& f : r.candidate_features) {
      const double a = predict_a(bundle, f), b = predict_b(bundle, f), c = predict_c(bundle, f),
                   d = predict_d(bundle, f);
      CHECK(a >= 0.0);
      CHECK(a <= 1.0);
      CHECK(d >= 0.0);
      CHECK(d <= 1.0);
      CHECK(b >= 0.0);
      CHECK(b <= bundle.ttl_initial);
      CHECK(c >= 0.0);
    }
  }

  const auto dir = fs::temp_directory_path() / "meshroute_unit_bundle";
  fs::remove_all(dir);
  save_bundle(bundle, dir);
  for (const char* f : {"model_a.txt", "model_b.txt", "model_c.txt", "model_d.txt", "normalizer_d.txt", "manifest.txt",
                        "validation_metrics.csv"}) {
    CHECK(fs::exists(dir / f));
  }
  const auto loaded = load_bundle(dir);
  CHECK(loaded.model_a == bundle.model_a);
  CHECK(loaded.model_b == bundle.model_b);
  CHECK(loaded.model_c == bundle.model_c);
  CHECK(loaded.model_d == bundle.model_d);
  CHECK(loaded.normalizer_d == bundle.normalizer_d);
  CHECK(loaded.seed == 42);
  CHECK(format_validation_metrics(loaded) == format_validation_metrics(bundle));

  const auto csv = format_validation_metrics(bundle);
  for (const char* row : {"A,boosted,accuracy", "A,boosted,f1", "A,boosted,roc_auc", "B,boosted,rmse", "B,boosted,mae",
                          "B,boosted,r2", "C,ridge,r2", "D,forest,roc_auc", "D,forest,recall_pos"}) {
    CHECK(csv.find(row) != std::string::npos);
  }
  fs::remove(dir / "model_c.txt");
  CHECK_THROWS_AS(load_bundle(dir), MissingDependencyError);
}

TEST_CASE("an untrained bundle refuses to predict") {
  ModelBundle b;
  CHECK_THROWS_AS(predict_a(b, FeatureArray{}), MissingDependencyError);
}
