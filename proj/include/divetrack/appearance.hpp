// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 divetrack contributors
//
// Appearance similarity between detections and tracks. Each track keeps a
// gallery of the most recent matched feature vectors; the distance from a
// detection to a track is the smallest cosine distance to any gallery member.

#pragma once

#include <deque>
#include <stdexcept>

#include <divetrack/core.hpp>

namespace divetrack {

/// 1 - f.g for unit vectors; 0 for identical direction, 2 for antipodal.
inline double cosine_distance(const FeatureVector& f, const FeatureVector& g) {
  return 1.0 - f.dot(g);
}

/// Insertion-ordered ring buffer of feature vectors. When full, pushing
/// evicts the oldest entry. Iteration runs oldest to newest.
class Gallery {
public:
  explicit Gallery(std::size_t capacity = 100) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("gallery capacity must be >= 1");
  }

  void push(const FeatureVector& f) {
    entries_.push_back(f);
    if (entries_.size() > capacity_) entries_.pop_front();
  }

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }

  const FeatureVector& operator[](std::size_t i) const { return entries_[i]; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

private:
  std::size_t capacity_;
  std::deque<FeatureVector> entries_;
};

/// Smallest cosine distance between f and any gallery member, i.e. the
/// distance to the best-matching stored appearance.
inline double gallery_distance(const FeatureVector& f, const Gallery& gallery) {
  if (gallery.empty())
    throw std::invalid_argument("gallery_distance: empty gallery");
  double best = 2.0;
  for (const auto& member : gallery) {
    const double d = cosine_distance(f, member);
    if (d < best) best = d;
  }
  return best;
}

}  // namespace divetrack
