#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "meshroute/scenario.hpp"

namespace meshroute {

inline constexpr std::size_t kFeatureCount = 8;
using FeatureArray = std::array<double, kFeatureCount>;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "ttl_left",     "hop_count",    "distance_to_target", "success_rate_origin",
    "priority_tolerance", "uptime_ratio", "buffer_ratio", "device_type_encoded"};

struct FeatureVector {
  int ttl_left = 0;
  int hop_count = 0;
  double distance_to_target = 0.0;
  double success_rate_origin = 0.0;
  double priority_tolerance = 0.0;
  double uptime_ratio = 0.0;
  double buffer_ratio = 0.0;
  int device_type_encoded = 0;

  FeatureArray to_array() const;
  static FeatureVector from_array(const FeatureArray& a);

  /// Throws ValidationError if a field is out of its domain.
  void validate() const;

  bool operator==(const FeatureVector&) const = default;
};

/// Hops remaining; throws ValidationError when hop_count > ttl_initial.
int ttl_left(int ttl_initial, int hop_count);

double distance_to_target(double x1, double y1, double x2, double y2);

/// Eq. (3) ratio. With zero attempts the device's prior is returned.
double success_rate_origin(double succeeded, double attempted, double prior);

/// Eq. (4) ratio. With zero elapsed time the device's prior is returned.
double uptime_ratio(double active_s, double total_s, double prior);

double buffer_ratio(int used, int capacity);

int encode_device_type(DeviceType t);
int encode_device_type(std::string_view name);

/// Min-max scaler fitted per feature column.
class Normalizer {
 public:
  Normalizer() = default;
  Normalizer(FeatureArray min, FeatureArray max);

  /// Throws DataError on an empty dataset.
  static Normalizer fit(std::span<const FeatureArray> rows);

  /// Constant columns map to 0; results are clamped to [0,1].
  FeatureArray apply(const FeatureArray& v) const;

  const FeatureArray& min() const { return min_; }
  const FeatureArray& max() const { return max_; }

  bool operator==(const Normalizer&) const = default;

 private:
  FeatureArray min_{};
  FeatureArray max_{};
};

}  // namespace meshroute
