// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 divetrack contributors

#include <catch2/catch_amalgamated.hpp>

#include <divetrack/core.hpp>

#include <array>
#include <cmath>
#include <limits>

using namespace divetrack;

TEST_CASE("bounding box geometry", "[core]") {
  const BoundingBox box{10.0, 20.0, 30.0, 40.0};
  CHECK(box.right() == 40.0);
  CHECK(box.bottom() == 60.0);
  CHECK(box.area() == 1200.0);
  const auto [cx, cy] = box.center();
  CHECK(cx == 25.0);
  CHECK(cy == 40.0);
  CHECK(box.valid());

  CHECK_FALSE(BoundingBox{0.0, 0.0, 0.0, 10.0}.valid());
  CHECK_FALSE(BoundingBox{0.0, 0.0, 10.0, -1.0}.valid());
  CHECK_FALSE(
      BoundingBox{std::numeric_limits<double>::quiet_NaN(), 0.0, 10.0, 10.0}.valid());
}

TEST_CASE("feature vector normalization", "[core]") {
  std::array<double, kFeatureDim> raw{};
  raw[0] = 3.0;
  raw[1] = 4.0;
  const FeatureVector f = FeatureVector::normalized(raw);
  CHECK(f[0] == Catch::Approx(0.6).margin(1e-15));
  CHECK(f[1] == Catch::Approx(0.8).margin(1e-15));
  CHECK(f.unit_norm());
  CHECK(f.dot(f) == Catch::Approx(1.0).margin(1e-12));

  SECTION("zero vector is rejected") {
    std::array<double, kFeatureDim> zero{};
    CHECK_THROWS_AS(FeatureVector::normalized(zero), std::invalid_argument);
  }
  SECTION("non-finite component is rejected") {
    raw[2] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(FeatureVector::normalized(raw), std::invalid_argument);
  }
  SECTION("wrong dimension is rejected") {
    const std::vector<double> shorter(kFeatureDim - 1, 1.0);
    CHECK_THROWS_AS(FeatureVector::normalized(shorter), std::invalid_argument);
  }
}

TEST_CASE("tracker config validation", "[core]") {
  TrackerConfig config;
  CHECK_NOTHROW(config.validate());  // published defaults are valid
  CHECK(config.iou_threshold == 0.75);
  CHECK(config.location_gate == 25.0);
  CHECK(config.appearance_gate_short == 1e-4);
  CHECK(config.appearance_gate_long == 5e-4);
  CHECK(config.long_term_after == 5);
  CHECK(config.gallery_capacity == 100);
  CHECK(config.confirm_after == 3);
  CHECK(config.new_track_window == 15);
  CHECK(config.merge_fraction == 0.25);
  CHECK(config.identity_recovery_enabled);

  SECTION("gates must be ordered") {
    config.appearance_gate_long = 0.5 * config.appearance_gate_short;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  }
  SECTION("rejects non-positive thresholds") {
    config.iou_threshold = 0.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  }
  SECTION("rejects merge fraction above one") {
    config.merge_fraction = 1.5;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  }
  SECTION("rejects zero confirmation window") {
    config.confirm_after = 0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  }
}
