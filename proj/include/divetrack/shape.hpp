// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 divetrack contributors
//
// Binary shape analysis for the appearance descriptor: Otsu binarization,
// connected components, Moore-neighbor boundary tracing, polygon metrics,
// convex hull, Douglas-Peucker simplification, and Hu moment invariants.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include <divetrack/image.hpp>

namespace divetrack::shape {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

using Polygon = std::vector<Point>;  // closed implicitly (last edge wraps)

/// Otsu global threshold; foreground is gray > t. A constant image has no
/// separating threshold and yields an all-background mask.
inline img::BinaryMask binarize_otsu(const img::ImageGray& gray) {
  img::BinaryMask mask(gray.width, gray.height);
  std::array<std::int64_t, 256> hist{};
  for (const std::uint8_t v : gray.pixels) ++hist[v];
  const std::int64_t total = static_cast<std::int64_t>(gray.pixels.size());
  if (total == 0) return mask;

  std::int64_t weighted_sum = 0;
  for (int v = 0; v < 256; ++v) weighted_sum += static_cast<std::int64_t>(v) * hist[v];

  int best_t = -1;
  double best_var = 0.0;
  std::int64_t w0 = 0;
  std::int64_t sum0 = 0;
  for (int t = 0; t < 256; ++t) {
    w0 += hist[t];
    if (w0 == 0) continue;
    const std::int64_t w1 = total - w0;
    if (w1 == 0) break;
    sum0 += static_cast<std::int64_t>(t) * hist[t];
    const double mu0 = static_cast<double>(sum0) / w0;
    const double mu1 = static_cast<double>(weighted_sum - sum0) / w1;
    const double var = static_cast<double>(w0) * static_cast<double>(w1) * (mu0 - mu1) * (mu0 - mu1);
    if (var > best_var) {
      best_var = var;
      best_t = t;
    }
  }
  if (best_t < 0) return mask;  // constant image: leave everything background
  for (std::size_t i = 0; i < gray.pixels.size(); ++i)
    mask.pixels[i] = gray.pixels[i] > best_t ? 1 : 0;
  return mask;
}

inline std::int64_t count_foreground(const img::BinaryMask& mask) {
  std::int64_t n = 0;
  for (const std::uint8_t v : mask.pixels) n += v != 0;
  return n;
}

/// Keeps only the largest 8-connected foreground component (ties broken by
/// scan order). Returns an all-background mask when the input is empty.
inline img::BinaryMask largest_component(const img::BinaryMask& mask) {
  const int w = mask.width;
  const int h = mask.height;
  std::vector<std::int32_t> label(static_cast<std::size_t>(w) * h, 0);
  std::int32_t next_label = 0;
  std::int32_t best_label = 0;
  std::int64_t best_size = 0;
  std::vector<std::pair<int, int>> stack;

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (mask.pixels[idx] == 0 || label[idx] != 0) continue;
      const std::int32_t id = ++next_label;
      std::int64_t size = 0;
      stack.clear();
      stack.emplace_back(x, y);
      label[idx] = id;
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        ++size;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const int nx = cx + dx;
            const int ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
            if (mask.pixels[nidx] == 0 || label[nidx] != 0) continue;
            label[nidx] = id;
            stack.emplace_back(nx, ny);
          }
      }
      if (size > best_size) {
        best_size = size;
        best_label = id;
      }
    }

  img::BinaryMask out(w, h);
  if (best_label == 0) return out;
  for (std::size_t i = 0; i < out.pixels.size(); ++i)
    out.pixels[i] = label[i] == best_label ? 1 : 0;
  return out;
}

namespace detail {

// Moore neighborhood in clockwise order (image coordinates, y down),
// starting from west.
inline constexpr std::array<std::pair<int, int>, 8> kMoore = {{
    {-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1},
}};

inline bool mask_at(const img::BinaryMask& mask, int x, int y) {
  if (x < 0 || y < 0 || x >= mask.width || y >= mask.height) return false;
  return mask.pixels[static_cast<std::size_t>(y) * mask.width + x] != 0;
}

inline int moore_index(int dx, int dy) {
  for (int i = 0; i < 8; ++i)
    if (kMoore[i].first == dx && kMoore[i].second == dy) return i;
  return 0;
}

}  // namespace detail

/// Moore-neighbor boundary trace of a (single-component) mask. Vertices are
/// pixel centers, clockwise; termination via the repeated entry state. A lone
/// pixel yields a single-vertex polygon; an empty mask yields none.
inline Polygon trace_boundary(const img::BinaryMask& mask) {
  int sx = -1;
  int sy = -1;
  for (int y = 0; y < mask.height && sx < 0; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (detail::mask_at(mask, x, y)) {
        sx = x;
        sy = y;
        break;
      }
  Polygon contour;
  if (sx < 0) return contour;

  int px = sx;
  int py = sy;
  int bx = sx - 1;  // backtrack: west of start is background by scan order
  int by = sy;
  const int start_back = detail::moore_index(bx - px, by - py);
  contour.push_back({static_cast<double>(px), static_cast<double>(py)});

  const std::int64_t cap = 8 * count_foreground(mask) + 8;
  for (std::int64_t iter = 0; iter < cap; ++iter) {
    const int entry = detail::moore_index(bx - px, by - py);
    int found = -1;
    for (int k = 1; k <= 8; ++k) {
      const int j = (entry + k) % 8;
      const auto [dx, dy] = detail::kMoore[j];
      if (detail::mask_at(mask, px + dx, py + dy)) {
        found = j;
        break;
      }
      bx = px + dx;  // last background neighbor examined
      by = py + dy;
    }
    if (found < 0) return contour;  // isolated pixel
    px += detail::kMoore[found].first;
    py += detail::kMoore[found].second;
    if (px == sx && py == sy && detail::moore_index(bx - px, by - py) == start_back)
      return contour;  // back at the initial (pixel, backtrack) state
    contour.push_back({static_cast<double>(px), static_cast<double>(py)});
  }
  return contour;
}

/// Shoelace area (absolute) of a closed polygon.
inline double polygon_area(const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return std::abs(twice) / 2.0;
}

inline double polygon_perimeter(const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n < 2) return 0.0;
  double length = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % n];
    length += std::hypot(b.x - a.x, b.y - a.y);
  }
  return length;
}

namespace detail {

inline double point_segment_distance(const Point& p, const Point& a, const Point& b) {
  const double vx = b.x - a.x;
  const double vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  if (len2 == 0.0) return std::hypot(p.x - a.x, p.y - a.y);
  // Perpendicular distance to the supporting line; standard for RDP.
  return std::abs(vx * (p.y - a.y) - vy * (p.x - a.x)) / std::sqrt(len2);
}

inline void rdp_open(const Polygon& pts, std::size_t lo, std::size_t hi, double eps,
                     std::vector<char>& keep) {
  if (hi <= lo + 1) return;
  double worst = -1.0;
  std::size_t split = lo;
  for (std::size_t i = lo + 1; i < hi; ++i) {
    const double d = point_segment_distance(pts[i], pts[lo], pts[hi]);
    if (d > worst) {
      worst = d;
      split = i;
    }
  }
  if (worst > eps) {
    keep[split] = 1;
    rdp_open(pts, lo, split, eps, keep);
    rdp_open(pts, split, hi, eps, keep);
  }
}

}  // namespace detail

/// Douglas-Peucker simplification of a closed polygon. The curve is split at
/// vertex 0 and the vertex farthest from it, and each open chain is reduced
/// independently; both anchors are always kept.
inline Polygon approximate_polygon(const Polygon& poly, double eps) {
  const std::size_t n = poly.size();
  if (n < 3) return poly;
  std::size_t far = 1;
  double best = -1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double d = std::hypot(poly[i].x - poly[0].x, poly[i].y - poly[0].y);
    if (d > best) {
      best = d;
      far = i;
    }
  }
  std::vector<char> keep(n, 0);
  keep[0] = 1;
  keep[far] = 1;
  detail::rdp_open(poly, 0, far, eps, keep);
  // Second chain wraps around; unroll it into a temporary index map.
  Polygon wrapped;
  std::vector<std::size_t> index;
  for (std::size_t i = far; i < n; ++i) {
    wrapped.push_back(poly[i]);
    index.push_back(i);
  }
  wrapped.push_back(poly[0]);
  index.push_back(0);
  std::vector<char> keep2(wrapped.size(), 0);
  detail::rdp_open(wrapped, 0, wrapped.size() - 1, eps, keep2);
  for (std::size_t i = 1; i + 1 < wrapped.size(); ++i)
    if (keep2[i]) keep[index[i]] = 1;

  Polygon out;
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i]) out.push_back(poly[i]);
  return out;
}

/// Andrew monotone chain convex hull (counterclockwise, no duplicate points,
/// collinear points dropped). Inputs of fewer than 3 distinct points come
/// back as-is after dedup.
inline Polygon convex_hull(Polygon pts) {
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  const std::size_t n = pts.size();
  if (n < 3) return pts;
  const auto cross = [](const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  Polygon hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);  // last point repeats the first
  return hull;
}

/// The seven Hu invariants of a foreground pixel set, treating each pixel as
/// a unit point mass at its integer coordinates. Central moments are
/// normalized as eta_pq = mu_pq / mu_00^(1 + (p+q)/2). The centroid comes
/// from exact integer sums so that translated copies agree to ~1e-12.
inline std::array<double, 7> hu_moments(const img::BinaryMask& mask) {
  std::int64_t n = 0;
  std::int64_t sum_x = 0;
  std::int64_t sum_y = 0;
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (detail::mask_at(mask, x, y)) {
        ++n;
        sum_x += x;
        sum_y += y;
      }
  if (n == 0) throw std::invalid_argument("hu_moments: empty mask");

  const double cx = static_cast<double>(sum_x) / static_cast<double>(n);
  const double cy = static_cast<double>(sum_y) / static_cast<double>(n);
  double mu11 = 0, mu20 = 0, mu02 = 0, mu30 = 0, mu03 = 0, mu21 = 0, mu12 = 0;
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (detail::mask_at(mask, x, y)) {
        const double dx = x - cx;
        const double dy = y - cy;
        mu11 += dx * dy;
        mu20 += dx * dx;
        mu02 += dy * dy;
        mu30 += dx * dx * dx;
        mu03 += dy * dy * dy;
        mu21 += dx * dx * dy;
        mu12 += dx * dy * dy;
      }

  const double m00 = static_cast<double>(n);
  const double s2 = m00 * m00;              // mu00^(1 + 2/2)
  const double s3 = s2 * std::sqrt(m00);    // mu00^(1 + 3/2)
  const double e20 = mu20 / s2;
  const double e02 = mu02 / s2;
  const double e11 = mu11 / s2;
  const double e30 = mu30 / s3;
  const double e03 = mu03 / s3;
  const double e21 = mu21 / s3;
  const double e12 = mu12 / s3;

  const double a = e30 + e12;
  const double b = e21 + e03;
  const double c = e30 - 3 * e12;
  const double d = 3 * e21 - e03;
  std::array<double, 7> hu{};
  hu[0] = e20 + e02;
  hu[1] = (e20 - e02) * (e20 - e02) + 4 * e11 * e11;
  hu[2] = c * c + d * d;
  hu[3] = a * a + b * b;
  hu[4] = c * a * (a * a - 3 * b * b) + d * b * (3 * a * a - b * b);
  hu[5] = (e20 - e02) * (a * a - b * b) + 4 * e11 * a * b;
  hu[6] = d * a * (a * a - 3 * b * b) - c * b * (3 * a * a - b * b);
  return hu;
}

}  // namespace divetrack::shape
