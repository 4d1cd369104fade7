#pragma once

#include <optional>
#include <span>
#include <vector>

#include "meshroute/features.hpp"
#include "meshroute/hop_log.hpp"
#include "meshroute/models.hpp"
#include "meshroute/network.hpp"

namespace meshroute::fusion {

/// d + a - b - c/100
double score_eq6(double a, double b, double c, double d);
/// 0.5a - 0.25b - 0.25(c/100)
double score_abc(double a, double b, double c);
/// 0.4d + 0.4a - 0.1b - 0.1(c/100)
double score_abcd(double a, double b, double c, double d);

/// w_d*d + w_a*a - w_b*b - w_c*(c/delay_divisor), always evaluated in that order.
double combined_score(const FusionWeights& w, double a, double b, double c, double d);

struct Prediction {
  int candidate_id = 0;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
};

/// `chosen` empty means fall back to AODV selection. `scored` lists the
/// candidates that were scored, in shortlist order.
struct Decision {
  std::optional<int> chosen;
  std::vector<ScoreBreakdown> scored;

  bool fallback() const { return !chosen.has_value(); }
  const ScoreBreakdown* chosen_breakdown() const;
};

/// Top-k by D (descending, ties to lower id) unless the variant is abc, which
/// scores everyone. Best combined score wins, ties to lower id; a best score
/// below `threshold` signals fallback.
Decision select_from_predictions(std::span<const Prediction> predictions, int k, double threshold,
                                 const FusionWeights& weights);

Decision select_forwarder(std::span<const int> candidates, std::span<const FeatureArray> features,
                          const ModelBundle& bundle, int k, double threshold, const FusionWeights& weights);

}  // namespace meshroute::fusion
