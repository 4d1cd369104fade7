#include <doctest.h>

#include <cmath>

#include "meshroute/error.hpp"
#include "meshroute/features.hpp"
#include "meshroute/rng.hpp"

using namespace meshroute;

TEST_CASE("ttl left") {
  CHECK(ttl_left(10, 3) == 7);
  CHECK(ttl_left(10, 0) == 10);
  CHECK(ttl_left(5, 5) == 0);
  CHECK_THROWS_AS(ttl_left(5, 6), ValidationError);
}

TEST_CASE("distance to target") {
  CHECK(distance_to_target(0, 0, 3, 4) == 5.0);
  CHECK(distance_to_target(7, 7, 7, 7) == 0.0);
  CHECK(distance_to_target(1, 2, 4, 6) == distance_to_target(4, 6, 1, 2));
}

TEST_CASE("success rate and uptime fall back to the prior without evidence") {
  CHECK(success_rate_origin(3, 4, 0.1) == 0.75);
  CHECK(success_rate_origin(0, 0, 0.42) == 0.42);
  CHECK(uptime_ratio(30, 60, 0.1) == 0.5);
  CHECK(uptime_ratio(0, 0, 0.9) == 0.9);
}

TEST_CASE("buffer ratio") {
  CHECK(buffer_ratio(15, 30) == 0.5);
  CHECK(buffer_ratio(0, 10) == 0.0);
  CHECK(buffer_ratio(10, 10) == 1.0);
}

TEST_CASE("device type encoding is alphabetical") {
  CHECK(encode_device_type(DeviceType::phone) == 0);
  CHECK(encode_device_type(DeviceType::relay) == 1);
  CHECK(encode_device_type(DeviceType::sensor) == 2);
  CHECK(encode_device_type("sensor") == 2);
}

TEST_CASE("feature vector round trip and validation") {
  FeatureVector v{7, 3, 42.5, 0.6, 0.2, 0.9, 0.25, 2};
  CHECK(FeatureVector::from_array(v.to_array()) == v);
  CHECK_NOTHROW(v.validate());
  v.buffer_ratio = 1.2;
  CHECK_THROWS_AS(v.validate(), ValidationError);
}

TEST_CASE("normalizer maps training data into the unit cube") {
  Rng rng(3);
  std::vector<FeatureArray> rows(200);
  for (auto& r : rows) {
    for (auto& v : r) v = rng.uniform(-50, 50);
    r[7] = 1.0;  // constant column
  }
  const auto n = Normalizer::fit(rows);
  for (const auto& r : rows) {
    const auto t = n.apply(r);
    for (double v : t) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(t[7] == 0.0);
  }
  FeatureArray far{};
  far.fill(1e9);
  for (double v : n.apply(far)) CHECK(v <= 1.0);
  CHECK_THROWS_AS(Normalizer::fit(std::vector<FeatureArray>{}), DataError);
}
