// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 divetrack contributors

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace divetrack {

/// Thrown for unreadable/unwritable files.
class io_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown for malformed file contents; the message carries "path:line".
class parse_error : public std::runtime_error {
public:
  parse_error(const std::string& file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  explicit parse_error(const std::string& what) : std::runtime_error(what), line_(0) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Axis-aligned pixel rectangle in corner+size form. Coordinates are real
/// valued because motion predictions are.
struct BoundingBox {
  double left = 0.0;
  double top = 0.0;
  double width = 0.0;
  double height = 0.0;

  double right() const { return left + width; }
  double bottom() const { return top + height; }
  double area() const { return width * height; }
  std::pair<double, double> center() const {
    return {left + width / 2.0, top + height / 2.0};
  }
  bool valid() const {
    return std::isfinite(left) && std::isfinite(top) && width > 0.0 && height > 0.0;
  }
};

/// Dimension of the appearance descriptor. See features.hpp for the layout.
inline constexpr std::size_t kFeatureDim = 58;

/// L2-normalized appearance descriptor.
struct FeatureVector {
  std::array<double, kFeatureDim> values{};

  double dot(const FeatureVector& other) const {
    double s = 0.0;
    for (std::size_t i = 0; i < kFeatureDim; ++i) s += values[i] * other.values[i];
    return s;
  }

  double norm() const { return std::sqrt(dot(*this)); }

  bool unit_norm(double tol = 1e-9) const { return std::abs(norm() - 1.0) <= tol; }

  /// Builds a unit vector from raw components. Throws std::invalid_argument
  /// on a zero (or non-finite) input, which has no direction.
  static FeatureVector normalized(std::span<const double> raw) {
    if (raw.size() != kFeatureDim)
      throw std::invalid_argument("feature vector must have " +
                                  std::to_string(kFeatureDim) + " components, got " +
                                  std::to_string(raw.size()));
    double sq = 0.0;
    for (double v : raw) {
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature component");
      sq += v * v;
    }
    if (sq <= 0.0) throw std::invalid_argument("zero feature vector cannot be normalized");
    FeatureVector f;
    const double inv = 1.0 / std::sqrt(sq);
    for (std::size_t i = 0; i < kFeatureDim; ++i) f.values[i] = raw[i] * inv;
    return f;
  }

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

/// One detector output for one frame. Frames are 1-based (MOT convention).
struct Detection {
  int frame = 1;
  BoundingBox box;
  double confidence = 1.0;
  std::optional<FeatureVector> feature;
  std::optional<std::uint64_t> crop_ref;  // opaque handle into caller-owned crop storage
};

/// Every tracking threshold and regime parameter, defaults as published.
struct TrackerConfig {
  double iou_threshold = 0.75;          // fast-path IOU acceptance
  double location_gate = 25.0;          // squared-Mahalanobis gate, short-term only
  double appearance_gate_short = 1e-4;  // cosine-distance gate, inactive <= long_term_after
  double appearance_gate_long = 5e-4;   // cosine-distance gate, inactive > long_term_after
  int long_term_after = 5;              // frames of inactivity before the long-term regime
  int gallery_capacity = 100;           // per-track appearance history
  int confirm_after = 3;                // consecutive matched frames before confirmation
  int new_track_window = 15;            // identity recovery examines tracks this young
  double merge_fraction = 0.25;         // fraction of gallery pairs that must agree
  bool identity_recovery_enabled = true;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string(name) + " must be > 0");
    };
    positive(iou_threshold, "iou_threshold");
    positive(location_gate, "location_gate");
    positive(appearance_gate_short, "appearance_gate_short");
    positive(appearance_gate_long, "appearance_gate_long");
    if (appearance_gate_long < appearance_gate_short)
      throw std::invalid_argument("appearance_gate_long must be >= appearance_gate_short");
    if (long_term_after < 1) throw std::invalid_argument("long_term_after must be >= 1");
    if (gallery_capacity < 1) throw std::invalid_argument("gallery_capacity must be >= 1");
    if (confirm_after < 1) throw std::invalid_argument("confirm_after must be >= 1");
    if (new_track_window < 1) throw std::invalid_argument("new_track_window must be >= 1");
    if (!(merge_fraction > 0.0 && merge_fraction <= 1.0))
      throw std::invalid_argument("merge_fraction must be in (0, 1]");
  }
};

/// One emitted box for one frame. `provisional` marks entries from tracks that
/// were still tentative when emitted.
struct AssignmentEntry {
  int track_id = 0;
  BoundingBox box;
  double confidence = 1.0;
  bool provisional = false;
};

/// Tracker output for a single frame, entries ordered by track id.
struct FrameAssignments {
  int frame = 0;
  std::vector<AssignmentEntry> entries;
};

/// An identified box, as read from a ground-truth or result file.
struct IdBox {
  int id = 0;
  BoundingBox box;
};

/// Per-frame identified boxes; used for both ground truth and tracker output.
using GroundTruth = std::map<int, std::vector<IdBox>>;

}  // namespace divetrack
