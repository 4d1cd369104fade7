#include "meshroute/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "meshroute/error.hpp"

namespace meshroute {

FeatureArray FeatureVector::to_array() const {
  return {static_cast<double>(ttl_left), static_cast<double>(hop_count), distance_to_target, success_rate_origin,
          priority_tolerance, uptime_ratio, buffer_ratio, static_cast<double>(device_type_encoded)};
}

FeatureVector FeatureVector::from_array(const FeatureArray& a) {
  FeatureVector v;
  v.ttl_left = static_cast<int>(std::lround(a[0]));
  v.hop_count = static_cast<int>(std::lround(a[1]));
  v.distance_to_target = a[2];
  v.success_rate_origin = a[3];
  v.priority_tolerance = a[4];
  v.uptime_ratio = a[5];
  v.buffer_ratio = a[6];
  v.device_type_encoded = static_cast<int>(std::lround(a[7]));
  return v;
}

void FeatureVector::validate() const {
  auto fraction = [](double f) { return f >= 0.0 && f <= 1.0; };
  if (ttl_left < 0) throw ValidationError("ttl_left < 0");
  if (hop_count < 0) throw ValidationError("hop_count < 0");
  if (!(distance_to_target >= 0.0)) throw ValidationError("distance_to_target < 0");
  if (!fraction(success_rate_origin) || !fraction(priority_tolerance) || !fraction(uptime_ratio) ||
      !fraction(buffer_ratio)) {
    throw ValidationError("feature fraction outside [0,1]");
  }
  if (device_type_encoded < 0 || device_type_encoded > 2) throw ValidationError("device_type_encoded outside {0,1,2}");
}

int ttl_left(int ttl_initial, int hop_count) {
  if (hop_count < 0 || hop_count > ttl_initial) {
    throw ValidationError("hop_count " + std::to_string(hop_count) + " exceeds ttl_initial " +
                          std::to_string(ttl_initial));
  }
  return ttl_initial - hop_count;
}

double distance_to_target(double x1, double y1, double x2, double y2) { return std::hypot(x2 - x1, y2 - y1); }

double success_rate_origin(double succeeded, double attempted, double prior) {
  if (attempted <= 0.0) return prior;
  return succeeded / attempted;
}

double uptime_ratio(double active_s, double total_s, double prior) {
  if (total_s <= 0.0) return prior;
  return active_s / total_s;
}

double buffer_ratio(int used, int capacity) {
  return static_cast<double>(used) / static_cast<double>(capacity);
}

int encode_device_type(DeviceType t) { return static_cast<int>(t); }

int encode_device_type(std::string_view name) { return encode_device_type(parse_device_type(name)); }

Normalizer::Normalizer(FeatureArray min, FeatureArray max) : min_(min), max_(max) {
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    if (max_[f] < min_[f]) throw ValidationError("normalizer max < min for feature " + std::string(kFeatureNames[f]));
  }
}

Normalizer Normalizer::fit(std::span<const FeatureArray> rows) {
  if (rows.empty()) throw DataError("cannot fit a normalizer on an empty dataset");
  FeatureArray lo = rows.front();
  FeatureArray hi = rows.front();
  for (const auto& r : rows) {
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      lo[f] = std::min(lo[f], r[f]);
      hi[f] = std::max(hi[f], r[f]);
    }
  }
  return Normalizer(lo, hi);
}

FeatureArray Normalizer::apply(const FeatureArray& v) const {
  FeatureArray out{};
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    const double range = max_[f] - min_[f];
    out[f] = range > 0.0 ? std::clamp((v[f] - min_[f]) / range, 0.0, 1.0) : 0.0;
  }
  return out;
}

}  // namespace meshroute
