// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 divetrack contributors
//
// Detection-to-track association: IOU fast path, appearance cost matrix with
// two-regime gating and the visual-ambiguity tie-break, and an exact
// Jonker-Volgenant assignment solver.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include <divetrack/appearance.hpp>
#include <divetrack/core.hpp>
#include <divetrack/kalman.hpp>

namespace divetrack {

/// Intersection-over-union of two axis-aligned boxes; 0 when disjoint or when
/// either box is empty.
inline double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.left, b.left);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top, b.top);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

/// A track's detection box at the previous frame, for the overlap fast path.
struct FastPathAnchor {
  int track_id = 0;
  BoundingBox box;
};

struct FastPathResult {
  std::vector<std::pair<std::size_t, int>> assignments;  // (detection index, track id)
  std::vector<std::size_t> leftovers;                    // unmatched detection indices
};

/// Greedy one-to-one matching over all (detection, anchor) pairs with
/// IOU >= threshold, taken in descending IOU order; ties prefer the lower
/// detection index, then the lower anchor index.
inline FastPathResult iou_fast_path(const std::vector<Detection>& current,
                                    const std::vector<FastPathAnchor>& previous,
                                    double threshold) {
  struct Pair {
    double overlap;
    std::size_t det;
    std::size_t anchor;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < current.size(); ++i)
    for (std::size_t k = 0; k < previous.size(); ++k) {
      const double v = iou(current[i].box, previous[k].box);
      if (v >= threshold) pairs.push_back({v, i, k});
    }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(b.overlap, a.det, a.anchor) < std::tie(a.overlap, b.det, b.anchor);
  });

  FastPathResult result;
  std::vector<char> det_used(current.size(), 0);
  std::vector<char> anchor_used(previous.size(), 0);
  for (const Pair& p : pairs) {
    if (det_used[p.det] || anchor_used[p.anchor]) continue;
    det_used[p.det] = 1;
    anchor_used[p.anchor] = 1;
    result.assignments.emplace_back(p.det, previous[p.anchor].track_id);
  }
  std::sort(result.assignments.begin(), result.assignments.end());
  for (std::size_t i = 0; i < current.size(); ++i)
    if (!det_used[i]) result.leftovers.push_back(i);
  return result;
}

/// Dense rectangular cost matrix; rows = detections, cols = candidate tracks.
/// Entries are finite costs >= 0 or kInfeasible.
class CostMatrix {
 public:
  static constexpr double kInfeasible = std::numeric_limits<double>::infinity();

  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, kInfeasible) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  bool feasible(std::size_t r, std::size_t c) const { return std::isfinite(at(r, c)); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct MatchResult {
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // (row, col)
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;
  double total_cost = 0.0;
};

namespace detail {

/// Jonker-Volgenant shortest augmenting path solver for a square min-cost
/// perfect assignment (1-indexed potentials form). All entries finite.
inline std::vector<int> solve_square(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace detail

/// Minimum-cost one-to-one assignment over the feasible entries, maximizing
/// the number of matches first. Infeasible entries are never matched; a
/// rectangular matrix leaves the remainder unmatched.
///
/// Implementation: pad to square with a finite sentinel larger than any sum
/// of real entries, solve exactly, then drop sentinel matches.
inline MatchResult hungarian(const CostMatrix& costs) {
  MatchResult result;
  const std::size_t rows = costs.rows();
  const std::size_t cols = costs.cols();
  if (rows == 0 || cols == 0) {
    for (std::size_t r = 0; r < rows; ++r) result.unmatched_rows.push_back(r);
    for (std::size_t c = 0; c < cols; ++c) result.unmatched_cols.push_back(c);
    return result;
  }

  double sentinel = 1.0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (costs.feasible(r, c)) sentinel += std::abs(costs.at(r, c));

  const std::size_t n = std::max(rows, cols);
  std::vector<std::vector<double>> padded(n, std::vector<double>(n, sentinel));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (costs.feasible(r, c)) padded[r][c] = costs.at(r, c);

  const std::vector<int> row_to_col = detail::solve_square(padded);
  std::vector<char> col_matched(cols, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    const int c = row_to_col[r];
    const bool real = c >= 0 && static_cast<std::size_t>(c) < cols &&
                      costs.feasible(r, static_cast<std::size_t>(c));
    if (real) {
      result.matches.emplace_back(r, static_cast<std::size_t>(c));
      result.total_cost += costs.at(r, static_cast<std::size_t>(c));
      col_matched[static_cast<std::size_t>(c)] = 1;
    } else {
      result.unmatched_rows.push_back(r);
    }
  }
  for (std::size_t c = 0; c < cols; ++c)
    if (!col_matched[c]) result.unmatched_cols.push_back(c);
  return result;
}

/// What the cost builder needs to know about one candidate track.
struct TrackCandidate {
  const Gallery* gallery = nullptr;
  bool long_term = false;
  const kalman::MotionState* predicted = nullptr;  // required for short-term
  kalman::NoiseModel noise;
};

/// Appearance cost matrix with gating and the ambiguity tie-break.
///
/// Base cost is the gallery distance. Entries fail out when the appearance
/// distance exceeds the regime's gate, and — short-term regime only — when
/// the squared Mahalanobis distance of the detection center from the
/// predicted position exceeds the location gate. When two or more tracks
/// pass the appearance gate for one detection, every feasible short-term
/// entry in that row gains a normalized location term to separate the
/// near-identical appearance costs.
inline CostMatrix build_cost_matrix(const std::vector<Detection>& detections,
                                    const std::vector<TrackCandidate>& tracks,
                                    const TrackerConfig& config) {
  CostMatrix costs(detections.size(), tracks.size());
  std::vector<double> location(detections.size() * tracks.size(),
                               std::numeric_limits<double>::quiet_NaN());
  std::vector<int> gate_passes(detections.size(), 0);

  for (std::size_t i = 0; i < detections.size(); ++i) {
    const Detection& det = detections[i];
    if (!det.feature)
      throw std::invalid_argument("build_cost_matrix: detection lacks a feature vector");
    const auto [cx, cy] = det.box.center();
    for (std::size_t j = 0; j < tracks.size(); ++j) {
      const TrackCandidate& track = tracks[j];
      const double appearance = gallery_distance(*det.feature, *track.gallery);
      const double gate =
          track.long_term ? config.appearance_gate_long : config.appearance_gate_short;
      if (appearance > gate) continue;
      ++gate_passes[i];
      if (track.long_term) {
        costs.at(i, j) = appearance;
        continue;
      }
      const double m2 = kalman::squared_mahalanobis(*track.predicted, cx, cy, track.noise);
      if (m2 > config.location_gate) continue;
      costs.at(i, j) = appearance;
      location[i * tracks.size() + j] = m2;
    }
  }

  for (std::size_t i = 0; i < detections.size(); ++i) {
    if (gate_passes[i] < 2) continue;
    for (std::size_t j = 0; j < tracks.size(); ++j) {
      const double m2 = location[i * tracks.size() + j];
      if (costs.feasible(i, j) && !std::isnan(m2))
        costs.at(i, j) += m2 / config.location_gate;
    }
  }
  return costs;
}

}  // namespace divetrack
