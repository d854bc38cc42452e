// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 divetrack contributors

#include <catch2/catch_amalgamated.hpp>

#include <divetrack/simulate.hpp>
#include <divetrack/tracker.hpp>

#include <array>
#include <cmath>
#include <vector>

using namespace divetrack;

namespace {

FeatureVector axis(std::size_t i) { return sim::axis_feature(i); }

FeatureVector rotated(double cosine) {
  std::array<double, kFeatureDim> raw{};
  raw[0] = cosine;
  raw[1] = std::sqrt(1.0 - cosine * cosine);
  return FeatureVector::normalized(raw);
}

Detection det_at(double cx, double cy, const FeatureVector& f, double w = 60.0,
                 double h = 80.0) {
  Detection det;
  det.box = {cx - w / 2.0, cy - h / 2.0, w, h};
  det.feature = f;
  return det;
}

/// Steps the tracker with a single detection and returns the emitted entries.
std::vector<AssignmentEntry> step1(Tracker& tracker, int frame, const Detection& det) {
  return tracker.step(frame, {det}).entries;
}

}  // namespace

TEST_CASE("tracks confirm after three consecutive hits", "[tracker]") {
  Tracker tracker;
  const Detection det = det_at(100.0, 100.0, axis(0));

  auto out = step1(tracker, 1, det);
  REQUIRE(out.size() == 1);
  CHECK(out[0].track_id == 1);
  CHECK(out[0].provisional);  // tentative on its first frame

  out = step1(tracker, 2, det);
  CHECK(out[0].provisional);

  out = step1(tracker, 3, det);
  CHECK_FALSE(out[0].provisional);  // confirmation precedes emission

  const auto snap = tracker.snapshot();
  REQUIRE(snap.size() == 1);
  CHECK(snap[0].state == TrackState::kConfirmed);
  CHECK(snap[0].consecutive_hits == 3);
  CHECK(snap[0].created_frame == 1);
  CHECK(snap[0].gallery_size == 3);
}

TEST_CASE("a tentative track dies on its first miss", "[tracker]") {
  Tracker tracker;
  step1(tracker, 1, det_at(100.0, 100.0, axis(0)));
  step1(tracker, 2, det_at(100.0, 100.0, axis(0)));
  tracker.step(3, {});  // miss while still tentative
  CHECK(tracker.snapshot().empty());

  // Ids are never reused: the next track gets id 2.
  const auto out = step1(tracker, 4, det_at(100.0, 100.0, axis(0)));
  REQUIRE(out.size() == 1);
  CHECK(out[0].track_id == 2);
}

TEST_CASE("confirmed tracks survive misses indefinitely", "[tracker]") {
  Tracker tracker;
  for (int frame = 1; frame <= 3; ++frame)
    step1(tracker, frame, det_at(100.0, 100.0, axis(0)));
  for (int frame = 4; frame <= 40; ++frame) tracker.step(frame, {});

  const auto snap = tracker.snapshot();
  REQUIRE(snap.size() == 1);
  CHECK(snap[0].state == TrackState::kConfirmed);
  CHECK(snap[0].last_seen_frame == 3);
  CHECK(snap[0].long_term);
}

TEST_CASE("the regime flips exactly past the inactivity limit", "[tracker]") {
  Tracker tracker;
  for (int frame = 1; frame <= 3; ++frame)
    step1(tracker, frame, det_at(100.0, 100.0, axis(0)));

  for (int frame = 4; frame <= 8; ++frame) tracker.step(frame, {});
  CHECK_FALSE(tracker.snapshot()[0].long_term);  // 8 - 3 = 5 is still short-term

  tracker.step(9, {});
  CHECK(tracker.snapshot()[0].long_term);  // 9 - 3 = 6 crosses the limit
}

TEST_CASE("the fast path follows overlap regardless of appearance", "[tracker]") {
  Tracker tracker;
  step1(tracker, 1, det_at(100.0, 100.0, axis(0)));
  // Same box, orthogonal feature: appearance matching would reject this
  // outright, but the overlap path does not look at features.
  const auto out = step1(tracker, 2, det_at(101.0, 100.0, axis(5)));
  REQUIRE(out.size() == 1);
  CHECK(out[0].track_id == 1);
  CHECK(tracker.snapshot()[0].gallery_size == 2);
}

TEST_CASE("short-term reassociation needs both gates", "[tracker]") {
  SECTION("appearance within 1e-4 and location within gate: same id") {
    Tracker tracker;
    for (int frame = 1; frame <= 3; ++frame)
      step1(tracker, frame, det_at(100.0, 100.0, axis(0)));
    // 30 px sideways kills the overlap (IOU 0.5 < 0.75) but stays well
    // within the location gate.
    const auto out = step1(tracker, 4, det_at(130.0, 100.0, rotated(1.0 - 5e-5)));
    REQUIRE(out.size() == 1);
    CHECK(out[0].track_id == 1);
  }
  SECTION("appearance distance 3e-4 exceeds the short gate: new track") {
    Tracker tracker;
    for (int frame = 1; frame <= 3; ++frame)
      step1(tracker, frame, det_at(100.0, 100.0, axis(0)));
    const auto out = step1(tracker, 4, det_at(130.0, 100.0, rotated(1.0 - 3e-4)));
    REQUIRE(out.size() == 1);
    CHECK(out[0].track_id == 2);
    CHECK(tracker.snapshot().size() == 2);
  }
}

TEST_CASE("long-term reidentification ignores location and widens the gate", "[tracker]") {
  Tracker tracker;
  for (int frame = 1; frame <= 3; ++frame)
    step1(tracker, frame, det_at(100.0, 100.0, axis(0)));
  for (int frame = 4; frame <= 9; ++frame) tracker.step(frame, {});

  // Appearance distance 3e-4 would fail the short gate (see above) but
  // passes the long one, and the far-away location is not gated at all.
  const auto out = step1(tracker, 10, det_at(500.0, 380.0, rotated(1.0 - 3e-4)));
  REQUIRE(out.size() == 1);
  CHECK(out[0].track_id == 1);
  const auto snap = tracker.snapshot();
  REQUIRE(snap.size() == 1);
  CHECK(snap[0].last_seen_frame == 10);
  CHECK_FALSE(snap[0].long_term);

  SECTION("motion restarts at the new location") {
    const auto next = step1(tracker, 11, det_at(500.0, 380.0, axis(0)));
    REQUIRE(next.size() == 1);
    CHECK(next[0].track_id == 1);  // matched in place: the filter moved with it
  }
}

TEST_CASE("identity recovery merges a returning target", "[tracker]") {
  Tracker tracker;
  // Target with id 1, confirmed over frames 1..3, then gone.
  for (int frame = 1; frame <= 3; ++frame)
    step1(tracker, frame, det_at(100.0, 100.0, axis(0)));
  for (int frame = 4; frame <= 9; ++frame) tracker.step(frame, {});

  // It returns at frame 10 looking different (axis 2), so a new track forms.
  std::vector<int> emitted_ids;
  for (int frame = 10; frame <= 12; ++frame) {
    const auto out = step1(tracker, frame, det_at(300.0, 200.0, axis(2)));
    REQUIRE(out.size() == 1);
    emitted_ids.push_back(out[0].track_id);
  }
  CHECK(emitted_ids == std::vector<int>{2, 2, 2});
  CHECK(tracker.snapshot().size() == 2);

  // Its true appearance resurfaces. With one base-feature frame the
  // cross-gallery agreement is 3/12 = 0.25 — not strictly above the bar.
  // A second one brings it to 6/15 = 0.4 and the galleries fuse.
  auto out = step1(tracker, 13, det_at(300.0, 200.0, axis(0)));
  CHECK(out[0].track_id == 2);
  CHECK(tracker.merge_events().empty());

  out = step1(tracker, 14, det_at(300.0, 200.0, axis(0)));
  REQUIRE(out.size() == 1);
  CHECK(out[0].track_id == 1);  // emitted under the surviving id

  REQUIRE(tracker.merge_events().size() == 1);
  const MergeEvent event = tracker.merge_events()[0];
  CHECK(event.frame == 14);
  CHECK(event.absorbed_id == 2);
  CHECK(event.surviving_id == 1);

  const auto snap = tracker.snapshot();
  REQUIRE(snap.size() == 1);
  CHECK(snap[0].id == 1);
  CHECK(snap[0].last_seen_frame == 14);
  CHECK(snap[0].gallery_size == 8);  // 3 original + 5 absorbed

  SECTION("the merged track keeps following the target") {
    const auto next = step1(tracker, 15, det_at(300.0, 200.0, axis(0)));
    REQUIRE(next.size() == 1);
    CHECK(next[0].track_id == 1);
  }
}

TEST_CASE("identity recovery can be disabled", "[tracker]") {
  TrackerConfig config;
  config.identity_recovery_enabled = false;
  Tracker tracker(config);
  for (int frame = 1; frame <= 3; ++frame)
    step1(tracker, frame, det_at(100.0, 100.0, axis(0)));
  for (int frame = 4; frame <= 9; ++frame) tracker.step(frame, {});
  for (int frame = 10; frame <= 12; ++frame)
    step1(tracker, frame, det_at(300.0, 200.0, axis(2)));
  for (int frame = 13; frame <= 16; ++frame)
    step1(tracker, frame, det_at(300.0, 200.0, axis(0)));

  CHECK(tracker.merge_events().empty());
  CHECK(tracker.snapshot().size() == 2);
}

TEST_CASE("gallery capacity bounds per-track memory", "[tracker]") {
  TrackerConfig config;
  config.gallery_capacity = 2;
  Tracker tracker(config);
  for (int frame = 1; frame <= 5; ++frame)
    step1(tracker, frame, det_at(100.0, 100.0, axis(0)));
  CHECK(tracker.snapshot()[0].gallery_size == 2);
}

TEST_CASE("input validation", "[tracker]") {
  Tracker tracker;
  step1(tracker, 1, det_at(100.0, 100.0, axis(0)));

  SECTION("frames must strictly increase") {
    CHECK_THROWS_AS(tracker.step(1, {}), std::invalid_argument);
    CHECK_THROWS_AS(tracker.step(0, {}), std::invalid_argument);
  }
  SECTION("features are mandatory") {
    Detection det = det_at(10.0, 10.0, axis(0));
    det.feature.reset();
    CHECK_THROWS_AS(tracker.step(2, {det}), std::invalid_argument);
  }
  SECTION("boxes must be valid") {
    Detection det = det_at(10.0, 10.0, axis(0));
    det.box.width = 0.0;
    CHECK_THROWS_AS(tracker.step(2, {det}), std::invalid_argument);
  }
  SECTION("config is validated at construction") {
    TrackerConfig bad;
    bad.iou_threshold = -1.0;
    CHECK_THROWS_AS(Tracker(bad), std::invalid_argument);
  }
}

TEST_CASE("identical inputs give identical outputs", "[tracker]") {
  const auto scenarios = sim::builtin_scenarios();
  const sim::SyntheticData data = sim::generate_data(scenarios.at("clutter"));

  const auto run = [&data] {
    Tracker tracker;
    std::vector<FrameAssignments> out;
    for (const auto& [frame, dets] : data.detections) out.push_back(tracker.step(frame, dets));
    return std::pair{std::move(out), tracker.merge_events()};
  };
  const auto [out1, merges1] = run();
  const auto [out2, merges2] = run();

  REQUIRE(out1.size() == out2.size());
  for (std::size_t i = 0; i < out1.size(); ++i) {
    REQUIRE(out1[i].frame == out2[i].frame);
    REQUIRE(out1[i].entries.size() == out2[i].entries.size());
    for (std::size_t k = 0; k < out1[i].entries.size(); ++k) {
      const AssignmentEntry& a = out1[i].entries[k];
      const AssignmentEntry& b = out2[i].entries[k];
      REQUIRE(a.track_id == b.track_id);
      REQUIRE(a.box.left == b.box.left);
      REQUIRE(a.box.top == b.box.top);
      REQUIRE(a.provisional == b.provisional);
    }
  }
  REQUIRE(merges1.size() == merges2.size());
}
