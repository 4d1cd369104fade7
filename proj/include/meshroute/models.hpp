#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "meshroute/features.hpp"
#include "meshroute/hop_log.hpp"
#include "meshroute/learners.hpp"

namespace meshroute {

/// Model A: success classifier. One row per forwarded hop (chosen candidate's
/// features); label = whether that message was finally delivered.
ml::Dataset extract_dataset_a(const std::vector<HopLogRecord>& logs);
/// Model B: hops still needed. Delivered messages only; label = total_hops - hop_index.
ml::Dataset extract_dataset_b(const std::vector<HopLogRecord>& logs);
/// Model C: remaining delay. Delivered messages only; label = sum of this and
/// all later hop delays of the message.
ml::Dataset extract_dataset_c(const std::vector<HopLogRecord>& logs);
/// Model D: forwarder suitability. Delivered messages only; one row per
/// candidate of each forwarded hop, labelled 1 iff it was the chosen one.
ml::Dataset extract_dataset_d(const std::vector<HopLogRecord>& logs);

struct BundleSpecs {
  ml::LearnerSpec a;
  ml::LearnerSpec b;
  ml::LearnerSpec c;
  ml::LearnerSpec d;
  double train_fraction = 0.8;

  /// The tuned configurations: boosted A and B, ridge C, forest D.
  static BundleSpecs defaults();
};

struct ValidationReport {
  ml::ClassifierMetrics a;
  ml::RegressorMetrics b;
  ml::RegressorMetrics c;
  ml::ClassifierMetrics d;
  std::size_t rows_a = 0, rows_b = 0, rows_c = 0, rows_d = 0;
};

struct ModelBundle {
  ml::TrainedModel model_a;
  ml::TrainedModel model_b;
  ml::TrainedModel model_c;
  ml::TrainedModel model_d;
  Normalizer normalizer_d;
  std::uint64_t seed = 0;
  std::string log_digest;
  int ttl_initial = 10;  // upper clamp for Model B
  ValidationReport validation;
  bool trained = false;
};

/// Splits each dataset (stratified for A and D), trains on the train part and
/// records held-out metrics. Throws DataError when Model A's data has only
/// one class.
ModelBundle train_bundle(const std::vector<HopLogRecord>& logs, std::uint64_t seed,
                         const BundleSpecs& specs = BundleSpecs::defaults());

double predict_a(const ModelBundle& bundle, const FeatureArray& features);
double predict_b(const ModelBundle& bundle, const FeatureArray& features);
double predict_c(const ModelBundle& bundle, const FeatureArray& features);
double predict_d(const ModelBundle& bundle, const FeatureArray& features);

/// model_{a,b,c,d}.txt, normalizer_d.txt, manifest.txt, validation_metrics.csv
void save_bundle(const ModelBundle& bundle, const std::filesystem::path& dir);
ModelBundle load_bundle(const std::filesystem::path& dir);

/// Long-format `model,algorithm,metric,value` table of held-out metrics.
std::string format_validation_metrics(const ModelBundle& bundle);

std::string dataset_csv(const ml::Dataset& data);

}  // namespace meshroute
