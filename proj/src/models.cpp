#include "meshroute/models.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

#include "meshroute/error.hpp"
#include "meshroute/rng.hpp"
#include "meshroute/text_io.hpp"

namespace meshroute {

namespace {

using MessageRecords = std::vector<const HopLogRecord*>;

/// Records grouped per (scenario, mode, message) in order of first appearance.
std::vector<MessageRecords> group_messages(const std::vector<HopLogRecord>& logs) {
  std::map<std::tuple<int, int, int>, std::size_t> slot;
  std::vector<MessageRecords> out;
  for (const auto& r : logs) {
    const auto key = std::make_tuple(r.scenario_id, static_cast<int>(r.mode), r.message_id);
    auto [it, inserted] = slot.try_emplace(key, out.size());
    if (inserted) out.emplace_back();
    out[it->second].push_back(&r);
  }
  return out;
}

FeatureArray chosen_or_throw(const HopLogRecord& r) {
  auto f = r.chosen_features();
  if (!f) {
    throw DataError("forwarded hop " + std::to_string(r.hop_index) + " of message " + std::to_string(r.message_id) +
                    " has no features for its chosen forwarder");
  }
  return *f;
}

ml::Dataset empty_dataset(ml::Role role) {
  ml::Dataset d;
  d.n_features = kFeatureCount;
  d.role = role;
  return d;
}

}  // namespace

ml::Dataset extract_dataset_a(const std::vector<HopLogRecord>& logs) {
  auto data = empty_dataset(ml::Role::A);
  for (const auto& r : logs) {
    if (r.hop_outcome != HopOutcome::forwarded) continue;
    data.add(chosen_or_throw(r), r.final_delivered ? 1.0 : 0.0);
  }
  return data;
}

ml::Dataset extract_dataset_b(const std::vector<HopLogRecord>& logs) {
  auto data = empty_dataset(ml::Role::B);
  for (const auto& r : logs) {
    if (!r.final_delivered || r.hop_outcome != HopOutcome::forwarded) continue;
    data.add(chosen_or_throw(r), static_cast<double>(r.total_hops - r.hop_index));
  }
  return data;
}

ml::Dataset extract_dataset_c(const std::vector<HopLogRecord>& logs) {
  auto data = empty_dataset(ml::Role::C);
  for (const auto& message : group_messages(logs)) {
    if (!message.front()->final_delivered) continue;
    MessageRecords hops;
    for (const auto* r : message) {
      if (r->hop_outcome == HopOutcome::forwarded) hops.push_back(r);
    }
    std::stable_sort(hops.begin(), hops.end(), [](auto* a, auto* b) { return a->hop_index < b->hop_index; });
    std::vector<double> remaining(hops.size() + 1, 0.0);
    for (std::size_t i = hops.size(); i-- > 0;) remaining[i] = remaining[i + 1] + hops[i]->hop_delay_s;
    for (std::size_t i = 0; i < hops.size(); ++i) data.add(chosen_or_throw(*hops[i]), remaining[i]);
  }
  return data;
}

ml::Dataset extract_dataset_d(const std::vector<HopLogRecord>& logs) {
  auto data = empty_dataset(ml::Role::D);
  for (const auto& r : logs) {
    if (!r.final_delivered || r.hop_outcome != HopOutcome::forwarded) continue;
    for (std::size_t i = 0; i < r.candidate_ids.size(); ++i) {
      data.add(r.candidate_features[i], r.candidate_ids[i] == r.chosen_id ? 1.0 : 0.0);
    }
  }
  return data;
}

BundleSpecs BundleSpecs::defaults() {
  BundleSpecs s;
  s.a = {ml::Algorithm::boosted,
         {{"subsample", "1.0"},
          {"n_estimators", "200"},
          {"min_child_weight", "5"},
          {"max_depth", "3"},
          {"gamma", "0.2"},
          {"colsample_bytree", "1.0"},
          {"learning_rate", "0.1"}}};
  s.b = {ml::Algorithm::boosted,
         {{"subsample", "0.8"},
          {"n_estimators", "300"},
          {"max_depth", "8"},
          {"learning_rate", "0.1"},
          {"colsample_bytree", "1.0"},
          {"min_child_weight", "1"},
          {"gamma", "0"}}};
  s.c = {ml::Algorithm::ridge, {{"alpha", "0.1"}}};
  s.d = {ml::Algorithm::forest,
         {{"max_depth", "None"},
          {"max_features", "log2"},
          {"min_samples_leaf", "1"},
          {"min_samples_split", "2"},
          {"n_estimators", "200"}}};
  return s;
}

namespace {

ml::TrainedModel train_with(const ml::LearnerSpec& spec, const ml::Dataset& data, std::uint64_t seed, ml::Task task) {
  switch (spec.algorithm) {
    case ml::Algorithm::ridge:
      return ml::train_ridge(data, spec.number("alpha"));
    case ml::Algorithm::forest:
      return ml::train_forest(data, spec, seed);
    case ml::Algorithm::boosted:
      return ml::train_boosted(data, spec, seed, task);
    case ml::Algorithm::tree: {
      ml::TreeParams p;
      if (spec.hyperparameters.contains("max_depth")) p.max_depth = spec.integer_or_none("max_depth");
      return ml::train_tree(data, p, task);
    }
  }
  throw ConfigError("unsupported learner");
}

void require_two_classes(const ml::Dataset& data, const std::string& what) {
  const auto positives = std::count(data.y.begin(), data.y.end(), 1.0);
  if (positives == 0 || positives == static_cast<long>(data.size())) {
    throw DataError(what + " training data contains a single class; run more or larger scenarios");
  }
}

ml::Dataset normalise(const ml::Dataset& data, const Normalizer& n) {
  ml::Dataset out = data;
  for (std::size_t i = 0; i < data.size(); ++i) {
    FeatureArray row{};
    std::copy_n(data.row(i).begin(), kFeatureCount, row.begin());
    const auto scaled = n.apply(row);
    std::copy(scaled.begin(), scaled.end(), out.x.begin() + static_cast<std::ptrdiff_t>(i * kFeatureCount));
  }
  return out;
}

int ttl_initial_of(const std::vector<HopLogRecord>& logs) {
  int ttl = 0;
  for (const auto& r : logs) ttl = std::max(ttl, r.ttl_left_at_hop + r.hop_index);
  return std::max(ttl, 1);
}

}  // namespace

ModelBundle train_bundle(const std::vector<HopLogRecord>& logs, std::uint64_t seed, const BundleSpecs& specs) {
  if (logs.empty()) throw DataError("cannot train a bundle from an empty log");
  const auto data_a = extract_dataset_a(logs);
  const auto data_b = extract_dataset_b(logs);
  const auto data_c = extract_dataset_c(logs);
  const auto data_d = extract_dataset_d(logs);
  require_two_classes(data_a, "Model A");
  require_two_classes(data_d, "Model D");
  if (data_b.size() < 4 || data_c.size() < 4) throw DataError("too few delivered hops to train Models B and C");

  ModelBundle bundle;
  bundle.seed = seed;
  bundle.log_digest = text::fnv1a_hex(format_hop_log(logs));
  bundle.ttl_initial = ttl_initial_of(logs);

  const auto split_a = ml::split_train_test(data_a, specs.train_fraction, derive_seed(seed, 0), true);
  const auto split_b = ml::split_train_test(data_b, specs.train_fraction, derive_seed(seed, 1), false);
  const auto split_c = ml::split_train_test(data_c, specs.train_fraction, derive_seed(seed, 2), false);
  const auto split_d = ml::split_train_test(data_d, specs.train_fraction, derive_seed(seed, 3), true);

  bundle.model_a = train_with(specs.a, split_a.train, derive_seed(seed, 10), ml::Task::classification);
  bundle.model_b = train_with(specs.b, split_b.train, derive_seed(seed, 11), ml::Task::regression);
  bundle.model_c = train_with(specs.c, split_c.train, derive_seed(seed, 12), ml::Task::regression);

  std::vector<FeatureArray> d_rows(split_d.train.size());
  for (std::size_t i = 0; i < d_rows.size(); ++i) std::copy_n(split_d.train.row(i).begin(), kFeatureCount, d_rows[i].begin());
  bundle.normalizer_d = Normalizer::fit(d_rows);
  bundle.model_d =
      train_with(specs.d, normalise(split_d.train, bundle.normalizer_d), derive_seed(seed, 13), ml::Task::classification);

  auto& v = bundle.validation;
  v.rows_a = data_a.size();
  v.rows_b = data_b.size();
  v.rows_c = data_c.size();
  v.rows_d = data_d.size();
  v.a = ml::evaluate_classifier(bundle.model_a, split_a.test);
  v.b = ml::evaluate_regressor(bundle.model_b, split_b.test);
  v.c = ml::evaluate_regressor(bundle.model_c, split_c.test);
  v.d = ml::evaluate_classifier(bundle.model_d, normalise(split_d.test, bundle.normalizer_d));
  bundle.trained = true;
  return bundle;
}

namespace {
void require_trained(const ModelBundle& b) {
  if (!b.trained) throw MissingDependencyError("model bundle has not been trained or loaded");
}
}  // namespace

double predict_a(const ModelBundle& bundle, const FeatureArray& features) {
  require_trained(bundle);
  return std::clamp(bundle.model_a.predict(features), 0.0, 1.0);
}

double predict_b(const ModelBundle& bundle, const FeatureArray& features) {
  require_trained(bundle);
  return std::clamp(bundle.model_b.predict(features), 0.0, static_cast<double>(bundle.ttl_initial));
}

double predict_c(const ModelBundle& bundle, const FeatureArray& features) {
  require_trained(bundle);
  return std::max(0.0, bundle.model_c.predict(features));
}

double predict_d(const ModelBundle& bundle, const FeatureArray& features) {
  require_trained(bundle);
  return std::clamp(bundle.model_d.predict(bundle.normalizer_d.apply(features)), 0.0, 1.0);
}

std::string format_validation_metrics(const ModelBundle& bundle) {
  std::ostringstream out;
  out << "model,algorithm,metric,value\n";
  auto classifier = [&](const char* name, const ml::TrainedModel& m, const ml::ClassifierMetrics& c) {
    const auto alg = ml::to_string(m.spec().algorithm);
    out << name << ',' << alg << ",accuracy," << text::fixed(c.accuracy, 6) << '\n';
    out << name << ',' << alg << ",f1," << text::fixed(c.f1, 6) << '\n';
    out << name << ',' << alg << ",roc_auc," << text::fixed(c.roc_auc, 6) << '\n';
    out << name << ',' << alg << ",precision_pos," << text::fixed(c.precision_pos, 6) << '\n';
    out << name << ',' << alg << ",recall_pos," << text::fixed(c.recall_pos, 6) << '\n';
  };
  auto regressor = [&](const char* name, const ml::TrainedModel& m, const ml::RegressorMetrics& r) {
    const auto alg = ml::to_string(m.spec().algorithm);
    out << name << ',' << alg << ",rmse," << text::fixed(r.rmse, 6) << '\n';
    out << name << ',' << alg << ",mae," << text::fixed(r.mae, 6) << '\n';
    out << name << ',' << alg << ",r2," << text::fixed(r.r2, 6) << '\n';
  };
  const auto& v = bundle.validation;
  classifier("A", bundle.model_a, v.a);
  regressor("B", bundle.model_b, v.b);
  regressor("C", bundle.model_c, v.c);
  classifier("D", bundle.model_d, v.d);
  return out.str();
}

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& dir) {
  require_trained(bundle);
  std::filesystem::create_directories(dir);
  text::write_atomic(dir / "model_a.txt", bundle.model_a.serialize());
  text::write_atomic(dir / "model_b.txt", bundle.model_b.serialize());
  text::write_atomic(dir / "model_c.txt", bundle.model_c.serialize());
  text::write_atomic(dir / "model_d.txt", bundle.model_d.serialize());

  std::ostringstream norm;
  norm << "meshroute-normalizer 1\n";
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    norm << kFeatureNames[f] << ' ' << text::exact(bundle.normalizer_d.min()[f]) << ' '
         << text::exact(bundle.normalizer_d.max()[f]) << '\n';
  }
  text::write_atomic(dir / "normalizer_d.txt", norm.str());

  const auto& v = bundle.validation;
  std::ostringstream manifest;
  manifest << "meshroute-bundle 1\n"
           << "seed " << bundle.seed << '\n'
           << "log_digest " << bundle.log_digest << '\n'
           << "ttl_initial " << bundle.ttl_initial << '\n'
           << "rows_a " << v.rows_a << '\n'
           << "rows_b " << v.rows_b << '\n'
           << "rows_c " << v.rows_c << '\n'
           << "rows_d " << v.rows_d << '\n'
           << "a_accuracy " << text::exact(v.a.accuracy) << '\n'
           << "a_f1 " << text::exact(v.a.f1) << '\n'
           << "a_roc_auc " << text::exact(v.a.roc_auc) << '\n'
           << "a_precision_pos " << text::exact(v.a.precision_pos) << '\n'
           << "a_recall_pos " << text::exact(v.a.recall_pos) << '\n'
           << "b_rmse " << text::exact(v.b.rmse) << '\n'
           << "b_mae " << text::exact(v.b.mae) << '\n'
           << "b_r2 " << text::exact(v.b.r2) << '\n'
           << "c_rmse " << text::exact(v.c.rmse) << '\n'
           << "c_mae " << text::exact(v.c.mae) << '\n'
           << "c_r2 " << text::exact(v.c.r2) << '\n'
           << "d_accuracy " << text::exact(v.d.accuracy) << '\n'
           << "d_f1 " << text::exact(v.d.f1) << '\n'
           << "d_roc_auc " << text::exact(v.d.roc_auc) << '\n'
           << "d_precision_pos " << text::exact(v.d.precision_pos) << '\n'
           << "d_recall_pos " << text::exact(v.d.recall_pos) << '\n';
  text::write_atomic(dir / "manifest.txt", manifest.str());
  text::write_atomic(dir / "validation_metrics.csv", format_validation_metrics(bundle));
}

namespace {
std::string slurp(const std::filesystem::path& p) {
  std::string out;
  for (const auto& line : text::read_lines(p)) {
    out += line;
    out += '\n';
  }
  return out;
}
}  // namespace

ModelBundle load_bundle(const std::filesystem::path& dir) {
  for (const char* f : {"model_a.txt", "model_b.txt", "model_c.txt", "model_d.txt", "normalizer_d.txt", "manifest.txt"}) {
    if (!std::filesystem::exists(dir / f)) throw MissingDependencyError("bundle is missing " + (dir / f).string());
  }
  ModelBundle b;
  b.model_a = ml::TrainedModel::deserialize(slurp(dir / "model_a.txt"));
  b.model_b = ml::TrainedModel::deserialize(slurp(dir / "model_b.txt"));
  b.model_c = ml::TrainedModel::deserialize(slurp(dir / "model_c.txt"));
  b.model_d = ml::TrainedModel::deserialize(slurp(dir / "model_d.txt"));

  const auto norm = text::read_lines(dir / "normalizer_d.txt");
  if (norm.size() < kFeatureCount + 1 || norm[0] != "meshroute-normalizer 1") {
    throw SchemaError("normalizer file is malformed");
  }
  FeatureArray lo{}, hi{};
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    const auto parts = text::split(norm[f + 1], ' ');
    if (parts.size() != 3 || parts[0] != kFeatureNames[f]) throw SchemaError("normalizer file is malformed");
    lo[f] = text::parse_double(parts[1], "normalizer min");
    hi[f] = text::parse_double(parts[2], "normalizer max");
  }
  b.normalizer_d = Normalizer(lo, hi);

  std::map<std::string, std::string> kv;
  for (const auto& line : text::read_lines(dir / "manifest.txt")) {
    const auto parts = text::split(line, ' ');
    if (parts.size() == 2) kv[parts[0]] = parts[1];
  }
  auto get = [&](const std::string& k) {
    auto it = kv.find(k);
    if (it == kv.end()) throw SchemaError("bundle manifest lacks '" + k + "'");
    return it->second;
  };
  auto real = [&](const std::string& k) { return text::parse_double(get(k), k); };
  b.seed = static_cast<std::uint64_t>(std::stoull(get("seed")));
  b.log_digest = get("log_digest");
  b.ttl_initial = static_cast<int>(text::parse_int(get("ttl_initial"), "ttl_initial"));
  auto& v = b.validation;
  v.rows_a = static_cast<std::size_t>(text::parse_int(get("rows_a"), "rows_a"));
  v.rows_b = static_cast<std::size_t>(text::parse_int(get("rows_b"), "rows_b"));
  v.rows_c = static_cast<std::size_t>(text::parse_int(get("rows_c"), "rows_c"));
  v.rows_d = static_cast<std::size_t>(text::parse_int(get("rows_d"), "rows_d"));
  v.a = {real("a_accuracy"), real("a_f1"), real("a_roc_auc"), real("a_precision_pos"), real("a_recall_pos")};
  v.b = {real("b_rmse"), real("b_mae"), real("b_r2")};
  v.c = {real("c_rmse"), real("c_mae"), real("c_r2")};
  v.d = {real("d_accuracy"), real("d_f1"), real("d_roc_auc"), real("d_precision_pos"), real("d_recall_pos")};
  b.trained = true;
  return b;
}

std::string dataset_csv(const ml::Dataset& data) {
  std::ostringstream out;
  for (const auto& name : kFeatureNames) out << name << ',';
  out << "label\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.row(i)) out << text::fixed(v, 6) << ',';
    out << text::fixed(data.y[i], 6) << '\n';
  }
  return out.str();
}

}  // namespace meshroute
