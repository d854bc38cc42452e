// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 divetrack contributors
//
// The multi-object tracking engine. Each frame runs, in order: Kalman
// prediction for recently seen tracks, an IOU fast path against the previous
// frame's matched boxes, a gated appearance assignment over everything left,
// track creation/confirmation/pruning, an identity-recovery merge pass, and
// finally output emission.
//
// Confirmed tracks are never deleted: a target that leaves the scene stays
// matchable indefinitely through its appearance gallery. Track ids are
// assigned in creation order and never reused.

#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <divetrack/appearance.hpp>
#include <divetrack/assignment.hpp>
#include <divetrack/core.hpp>
#include <divetrack/kalman.hpp>

namespace divetrack {

enum class TrackState { kTentative, kConfirmed };

/// Records that `absorbed_id` was merged into the older `surviving_id` at
/// `frame`. Output rows at and after `frame` carry the surviving id; batch
/// post-processing may rewrite earlier rows as well.
struct MergeEvent {
  int frame = 0;
  int absorbed_id = 0;
  int surviving_id = 0;
};

struct TrackSummary {
  int id = 0;
  TrackState state = TrackState::kTentative;
  bool long_term = false;
  int created_frame = 0;
  int last_seen_frame = 0;
  std::size_t gallery_size = 0;
  int consecutive_hits = 0;
};

class Tracker {
 public:
  explicit Tracker(TrackerConfig config = {}, kalman::NoiseScales noise_scales = {})
      : config_(config), scales_(noise_scales) {
    config_.validate();
  }

  const TrackerConfig& config() const { return config_; }
  int current_frame() const { return frame_; }
  const std::vector<MergeEvent>& merge_events() const { return merge_events_; }

  /// Advances the tracker by one frame. Frame indices must be strictly
  /// increasing; every detection must carry a feature vector.
  FrameAssignments step(int frame, const std::vector<Detection>& detections) {
    if (frame <= frame_)
      throw std::invalid_argument("step: frame indices must be strictly increasing");
    for (const Detection& det : detections) {
      if (!det.feature)
        throw std::invalid_argument("step: detection without a feature vector");
      if (!det.box.valid()) throw std::invalid_argument("step: invalid detection box");
    }
    const int previous_frame = frame_;
    frame_ = frame;

    // 1. Predict motion for tracks still in the short-term regime; the
    //    filter stays frozen once a track has been gone long enough that
    //    propagated uncertainty stops being informative.
    for (Track& track : tracks_)
      if (frame - track.last_seen <= config_.long_term_after)
        track.motion = kalman::predict(track.motion, track.noise);

    // 2. IOU fast path against the boxes matched in the immediately
    //    preceding frame.
    std::vector<FastPathAnchor> anchors;
    if (frame == previous_frame + 1)
      for (const Track& track : tracks_)
        if (track.last_match == previous_frame)
          anchors.push_back({track.id, track.last_box});
    const FastPathResult fast = iou_fast_path(detections, anchors, config_.iou_threshold);

    std::vector<char> det_matched(detections.size(), 0);
    std::vector<char> track_matched(tracks_.size(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> matches;  // (det idx, track idx)
    for (const auto& [det_idx, track_id] : fast.assignments) {
      const std::size_t t = index_of(track_id);
      matches.emplace_back(det_idx, t);
      det_matched[det_idx] = 1;
      track_matched[t] = 1;
    }

    // 3. Gated appearance assignment over the remainder. Tentative and
    //    confirmed tracks of any age participate; the inactivity regime is
    //    applied per entry.
    std::vector<std::size_t> free_dets;
    for (std::size_t i = 0; i < detections.size(); ++i)
      if (!det_matched[i]) free_dets.push_back(i);
    std::vector<std::size_t> free_tracks;
    for (std::size_t t = 0; t < tracks_.size(); ++t)
      if (!track_matched[t]) free_tracks.push_back(t);

    if (!free_dets.empty() && !free_tracks.empty()) {
      std::vector<Detection> rows;
      rows.reserve(free_dets.size());
      for (const std::size_t i : free_dets) rows.push_back(detections[i]);
      std::vector<TrackCandidate> cols;
      cols.reserve(free_tracks.size());
      for (const std::size_t t : free_tracks) {
        const Track& track = tracks_[t];
        TrackCandidate candidate;
        candidate.gallery = &track.gallery;
        candidate.long_term = frame - track.last_seen > config_.long_term_after;
        candidate.predicted = &track.motion;
        candidate.noise = track.noise;
        cols.push_back(candidate);
      }
      const MatchResult assigned = hungarian(build_cost_matrix(rows, cols, config_));
      for (const auto& [r, c] : assigned.matches) {
        const std::size_t det_idx = free_dets[r];
        const std::size_t t = free_tracks[c];
        matches.emplace_back(det_idx, t);
        det_matched[det_idx] = 1;
        track_matched[t] = 1;
      }
    }

    // 4. Fold matched detections into their tracks.
    for (const auto& [det_idx, t] : matches) apply_match(tracks_[t], detections[det_idx]);

    // 5. Unmatched detections seed new tentative tracks.
    for (std::size_t i = 0; i < detections.size(); ++i)
      if (!det_matched[i]) create_track(detections[i]);

    // 6. Confirm tentatives that held on long enough; drop the ones that
    //    missed a frame.
    for (Track& track : tracks_)
      if (track.state == TrackState::kTentative && track.last_seen == frame &&
          track.consecutive_hits >= config_.confirm_after)
        track.state = TrackState::kConfirmed;
    std::erase_if(tracks_, [&](const Track& track) {
      return track.state == TrackState::kTentative && track.last_seen < frame;
    });

    // 7. Identity recovery: young confirmed tracks may really be returning
    //    old targets.
    if (config_.identity_recovery_enabled) identity_recovery(frame);

    // 8. Emit everything matched this frame. A track absorbed by a merge
    //    emits under the surviving id.
    FrameAssignments out;
    out.frame = frame;
    for (const Track& track : tracks_)
      if (track.last_match == frame)
        out.entries.push_back({track.id, track.last_box, track.last_confidence,
                               track.state == TrackState::kTentative});
    std::sort(out.entries.begin(), out.entries.end(),
              [](const AssignmentEntry& a, const AssignmentEntry& b) {
                return a.track_id < b.track_id;
              });
    return out;
  }

  /// Read-only track summaries, ordered by id. The regime reflects the last
  /// stepped frame.
  std::vector<TrackSummary> snapshot() const {
    std::vector<TrackSummary> out;
    out.reserve(tracks_.size());
    for (const Track& track : tracks_) {
      TrackSummary s;
      s.id = track.id;
      s.state = track.state;
      s.long_term = frame_ - track.last_seen > config_.long_term_after;
      s.created_frame = track.created;
      s.last_seen_frame = track.last_seen;
      s.gallery_size = track.gallery.size();
      s.consecutive_hits = track.consecutive_hits;
      out.push_back(s);
    }
    std::sort(out.begin(), out.end(),
              [](const TrackSummary& a, const TrackSummary& b) { return a.id < b.id; });
    return out;
  }

 private:
  struct Track {
    int id = 0;
    TrackState state = TrackState::kTentative;
    Gallery gallery;
    std::deque<int> gallery_stamps;  // frame of each gallery entry, oldest first
    kalman::MotionState motion;
    kalman::NoiseModel noise;
    int created = 0;
    int last_seen = 0;   // advanced by matches and by merges
    int last_match = 0;  // advanced by detection matches only
    int consecutive_hits = 0;
    BoundingBox last_box;
    double last_confidence = 1.0;

    Track(int track_id, std::size_t capacity) : id(track_id), gallery(capacity) {}

    void push_feature(const FeatureVector& f, int frame) {
      if (gallery.size() == gallery.capacity() && !gallery_stamps.empty())
        gallery_stamps.pop_front();
      gallery.push(f);
      gallery_stamps.push_back(frame);
    }
  };

  std::size_t index_of(int track_id) const {
    for (std::size_t t = 0; t < tracks_.size(); ++t)
      if (tracks_[t].id == track_id) return t;
    throw std::logic_error("unknown track id");
  }

  void apply_match(Track& track, const Detection& det) {
    const auto [cx, cy] = det.box.center();
    const kalman::NoiseModel noise = scales_.for_height(det.box.height);
    if (frame_ - track.last_seen > config_.long_term_after) {
      // Re-acquired after a long absence: the frozen filter is stale, so
      // restart motion from the detection.
      track.motion = kalman::initiate(cx, cy, noise);
    } else {
      track.motion = kalman::update(track.motion, cx, cy, noise);
    }
    track.noise = noise;
    track.consecutive_hits =
        track.last_seen == frame_ - 1 ? track.consecutive_hits + 1 : 1;
    track.push_feature(*det.feature, frame_);
    track.last_box = det.box;
    track.last_confidence = det.confidence;
    track.last_seen = frame_;
    track.last_match = frame_;
  }

  void create_track(const Detection& det) {
    Track track(next_id_++, static_cast<std::size_t>(config_.gallery_capacity));
    const auto [cx, cy] = det.box.center();
    track.noise = scales_.for_height(det.box.height);
    track.motion = kalman::initiate(cx, cy, track.noise);
    track.created = frame_;
    track.last_seen = frame_;
    track.last_match = frame_;
    track.consecutive_hits = 1;
    track.last_box = det.box;
    track.last_confidence = det.confidence;
    track.push_feature(*det.feature, frame_);
    tracks_.push_back(std::move(track));
  }

  /// Fraction of cross-gallery pairs closer than the long-term appearance
  /// gate.
  double agreement_fraction(const Track& a, const Track& b) const {
    std::size_t close = 0;
    for (const FeatureVector& fa : a.gallery)
      for (const FeatureVector& fb : b.gallery)
        if (cosine_distance(fa, fb) < config_.appearance_gate_long) ++close;
    return static_cast<double>(close) /
           (static_cast<double>(a.gallery.size()) * static_cast<double>(b.gallery.size()));
  }

  void identity_recovery(int frame) {
    // Ascending id order keeps multi-merge frames deterministic.
    std::vector<int> young_ids;
    for (const Track& track : tracks_)
      if (track.state == TrackState::kConfirmed &&
          frame - track.created <= config_.new_track_window)
        young_ids.push_back(track.id);
    std::sort(young_ids.begin(), young_ids.end());

    for (const int id : young_ids) {
      std::size_t ti = tracks_.size();
      for (std::size_t t = 0; t < tracks_.size(); ++t)
        if (tracks_[t].id == id) ti = t;
      if (ti == tracks_.size()) continue;  // already absorbed this frame

      // Candidates: tracks unseen since this one appeared.
      std::size_t best = tracks_.size();
      double best_fraction = config_.merge_fraction;  // must strictly exceed
      for (std::size_t t = 0; t < tracks_.size(); ++t) {
        if (t == ti || tracks_[t].last_seen >= tracks_[ti].created) continue;
        const double fraction = agreement_fraction(tracks_[ti], tracks_[t]);
        if (fraction > best_fraction ||
            (fraction == best_fraction && best < tracks_.size() &&
             tracks_[t].id < tracks_[best].id)) {
          best_fraction = fraction;
          best = t;
        }
      }
      if (best == tracks_.size()) continue;
      merge_tracks(best, ti, frame);
    }
  }

  /// Merges the younger track at `absorbed` into the older one at
  /// `survivor`. The survivor takes over the recent gallery, motion state and
  /// box, and keeps emitting under its original id.
  void merge_tracks(std::size_t survivor, std::size_t absorbed, int frame) {
    Track& keep = tracks_[survivor];
    Track& gone = tracks_[absorbed];

    struct Stamped {
      int frame;
      const FeatureVector* feature;
    };
    std::vector<Stamped> combined;
    combined.reserve(keep.gallery.size() + gone.gallery.size());
    for (std::size_t i = 0; i < keep.gallery.size(); ++i)
      combined.push_back({keep.gallery_stamps[i], &keep.gallery[i]});
    for (std::size_t i = 0; i < gone.gallery.size(); ++i)
      combined.push_back({gone.gallery_stamps[i], &gone.gallery[i]});
    std::stable_sort(combined.begin(), combined.end(),
                     [](const Stamped& a, const Stamped& b) { return a.frame < b.frame; });
    const std::size_t capacity = keep.gallery.capacity();
    const std::size_t start = combined.size() > capacity ? combined.size() - capacity : 0;

    Gallery merged(capacity);
    std::deque<int> stamps;
    for (std::size_t i = start; i < combined.size(); ++i) {
      merged.push(*combined[i].feature);
      stamps.push_back(combined[i].frame);
    }
    keep.gallery = std::move(merged);
    keep.gallery_stamps = std::move(stamps);
    keep.motion = gone.motion;
    keep.noise = gone.noise;
    keep.last_box = gone.last_box;
    keep.last_confidence = gone.last_confidence;
    keep.last_seen = frame;
    keep.last_match = gone.last_match;
    keep.consecutive_hits = gone.consecutive_hits;

    merge_events_.push_back({frame, gone.id, keep.id});
    tracks_.erase(tracks_.begin() + static_cast<std::ptrdiff_t>(absorbed));
  }

  TrackerConfig config_;
  kalman::NoiseScales scales_;
  std::vector<Track> tracks_;
  std::vector<MergeEvent> merge_events_;
  int frame_ = 0;
  int next_id_ = 1;
};

}  // namespace divetrack
