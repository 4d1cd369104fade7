#include "meshroute/fusion.hpp"

#include <algorithm>

#include "meshroute/error.hpp"

namespace meshroute::fusion {

double score_eq6(double a, double b, double c, double d) { return combined_score(FusionWeights::eq6(), a, b, c, d); }

double score_abc(double a, double b, double c) { return combined_score(FusionWeights::abc(), a, b, c, 0.0); }

double score_abcd(double a, double b, double c, double d) {
  return combined_score(FusionWeights::abcd(), a, b, c, d);
}

double combined_score(const FusionWeights& w, double a, double b, double c, double d) {
  return w.w_d * d + w.w_a * a - w.w_b * b - w.w_c * (c / w.delay_divisor);
}

const ScoreBreakdown* Decision::chosen_breakdown() const {
  if (!chosen) return nullptr;
  for (const auto& s : scored) {
    if (s.candidate_id == *chosen) return &s;
  }
  return nullptr;
}

Decision select_from_predictions(std::span<const Prediction> predictions, int k, double threshold,
                                 const FusionWeights& weights) {
  if (k < 1) throw ConfigError("fusion k must be at least 1");
  Decision decision;
  if (predictions.empty()) return decision;

  std::vector<Prediction> shortlist(predictions.begin(), predictions.end());
  if (weights.variant != FusionWeights::Variant::abc) {
    std::sort(shortlist.begin(), shortlist.end(), [](const Prediction& x, const Prediction& y) {
      if (x.d != y.d) return x.d > y.d;
      return x.candidate_id < y.candidate_id;
    });
    if (shortlist.size() > static_cast<std::size_t>(k)) shortlist.resize(static_cast<std::size_t>(k));
  }

  const ScoreBreakdown* best = nullptr;
  decision.scored.reserve(shortlist.size());
  for (const auto& p : shortlist) {
    decision.scored.push_back({p.candidate_id, p.a, p.b, p.c, p.d, combined_score(weights, p.a, p.b, p.c, p.d)});
  }
  for (const auto& s : decision.scored) {
    if (!best || s.combined > best->combined || (s.combined == best->combined && s.candidate_id < best->candidate_id)) {
      best = &s;
    }
  }
  if (best && best->combined >= threshold) decision.chosen = best->candidate_id;
  return decision;
}

Decision select_forwarder(std::span<const int> candidates, std::span<const FeatureArray> features,
                          const ModelBundle& bundle, int k, double threshold, const FusionWeights& weights) {
  if (candidates.size() != features.size()) throw ValidationError("candidate and feature counts differ");
  std::vector<Prediction> predictions;
  predictions.reserve(candidates.size());
  const bool need_d = weights.variant != FusionWeights::Variant::abc;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& f = features[i];
    predictions.push_back({candidates[i], predict_a(bundle, f), predict_b(bundle, f), predict_c(bundle, f),
                           need_d ? predict_d(bundle, f) : 0.0});
  }
  return select_from_predictions(predictions, k, threshold, weights);
}

}  // namespace meshroute::fusion
