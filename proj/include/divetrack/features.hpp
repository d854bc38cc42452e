// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 divetrack contributors
//
// Hand-crafted appearance descriptor. Every detection crop maps to a fixed
// 58-dimensional, L2-normalized vector:
//
//   [ 0..30)  color:     LAB mean/std (6) + 8-bin histogram per channel (24),
//                        on the 128x128 resize
//   [30..46)  frequency: 16 annular means of the log-compressed 64x64 DFT
//                        magnitude spectrum
//   [46..49)  contour:   extent, compactness, simplified-polygon vertex count
//   [49..51)  hull:      solidity, hull/contour perimeter ratio
//   [51..58)  moments:   log-compressed Hu invariants of the binary mask
//
// The layout is versioned: changing any block invalidates stored feature
// sidecars.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <divetrack/core.hpp>
#include <divetrack/image.hpp>
#include <divetrack/shape.hpp>

namespace divetrack {

namespace img {

struct Lab {
  double L = 0.0;
  double a = 0.0;
  double b = 0.0;
};

/// sRGB (8-bit, D65) to CIELAB.
inline Lab srgb_to_lab(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
  const auto linearize = [](std::uint8_t v8) {
    const double c = v8 / 255.0;
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
  };
  const double r = linearize(r8);
  const double g = linearize(g8);
  const double b = linearize(b8);
  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  // Reference white from the matrix row sums, so pure white lands exactly on
  // L = 100, a = b = 0 instead of drifting by the rounding of the published
  // 7-digit coefficients.
  constexpr double xn = 0.4124564 + 0.3575761 + 0.1804375;
  constexpr double yn = 0.2126729 + 0.7151522 + 0.0721750;
  constexpr double zn = 0.0193339 + 0.1191920 + 0.9503041;
  const auto f = [](double t) {
    constexpr double delta = 6.0 / 29.0;
    return t > delta * delta * delta ? std::cbrt(t)
                                     : t / (3.0 * delta * delta) + 4.0 / 29.0;
  };
  const double fx = f(x / xn);
  const double fy = f(y / yn);
  const double fz = f(z / zn);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

}  // namespace img

namespace detail {

/// Iterative radix-2 Cooley-Tukey, in place. Size must be a power of two.
inline void fft_inplace(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("fft_inplace: size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

/// Pairwise (cascade) summation: O(log n) rounding error, and bit-exact for
/// equal addends when n is a power of two, so flat crops report an exactly
/// zero channel deviation.
inline double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 2) return n == 2 ? v[0] + v[1] : (n == 1 ? v[0] : 0.0);
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

}  // namespace detail

/// Radial spectrum of a 64x64 grayscale image: 2-D DFT magnitudes scaled by
/// the pixel count, log(1+m)-compressed, then averaged over 16 annuli of
/// equal radial width (DC falls in bin 0).
inline std::array<double, 16> frequency_bins(const img::ImageGray& gray) {
  if (gray.width != 64 || gray.height != 64)
    throw std::invalid_argument("frequency_bins: expects a 64x64 image");
  constexpr int n = 64;
  std::vector<std::complex<double>> grid(n * n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      grid[static_cast<std::size_t>(y) * n + x] = {static_cast<double>(gray.at(x, y)), 0.0};

  std::vector<std::complex<double>> line(n);
  for (int y = 0; y < n; ++y) {
    std::copy_n(grid.begin() + static_cast<std::ptrdiff_t>(y) * n, n, line.begin());
    detail::fft_inplace(line);
    std::copy_n(line.begin(), n, grid.begin() + static_cast<std::ptrdiff_t>(y) * n);
  }
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) line[y] = grid[static_cast<std::size_t>(y) * n + x];
    detail::fft_inplace(line);
    for (int y = 0; y < n; ++y) grid[static_cast<std::size_t>(y) * n + x] = line[y];
  }

  std::array<double, 16> sums{};
  std::array<int, 16> counts{};
  const double bin_width = 32.0 * std::numbers::sqrt2 / 16.0;
  for (int v = 0; v < n; ++v) {
    const int fv = v <= n / 2 ? v : v - n;
    for (int u = 0; u < n; ++u) {
      const int fu = u <= n / 2 ? u : u - n;
      const double r = std::hypot(static_cast<double>(fu), static_cast<double>(fv));
      const int bin = std::min(15, static_cast<int>(r / bin_width));
      const double mag = std::abs(grid[static_cast<std::size_t>(v) * n + u]) / (n * n);
      sums[bin] += std::log1p(mag);
      ++counts[bin];
    }
  }
  std::array<double, 16> out{};
  for (int i = 0; i < 16; ++i) out[i] = counts[i] > 0 ? sums[i] / counts[i] : 0.0;
  return out;
}

/// Computes the appearance descriptor for one detection crop.
inline FeatureVector extract_features(const img::ImageRgb& crop) {
  if (crop.width < 8 || crop.height < 8)
    throw std::invalid_argument("extract_features: crop must be at least 8x8");

  std::array<double, kFeatureDim> raw{};
  const img::ImageRgb rgb128 = img::resize_bilinear(crop, 128, 128);

  // --- color block -------------------------------------------------------
  const std::size_t npix = static_cast<std::size_t>(rgb128.width) * rgb128.height;
  std::vector<img::Lab> lab(npix);
  for (int y = 0; y < rgb128.height; ++y)
    for (int x = 0; x < rgb128.width; ++x) {
      const std::uint8_t* p = rgb128.at(x, y);
      lab[static_cast<std::size_t>(y) * rgb128.width + x] = img::srgb_to_lab(p[0], p[1], p[2]);
    }
  const auto channel = [&](const img::Lab& v, int c) {
    return c == 0 ? v.L : (c == 1 ? v.a : v.b);
  };
  std::vector<double> scratch(npix);
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < npix; ++i) scratch[i] = channel(lab[i], c);
    const double mean = detail::pairwise_sum(scratch.data(), npix) /
                        static_cast<double>(npix);
    for (auto& d : scratch) d = (d - mean) * (d - mean);
    const double var = detail::pairwise_sum(scratch.data(), npix) /
                       static_cast<double>(npix);
    raw[c] = mean;
    raw[3 + c] = std::sqrt(var);
    const double lo = c == 0 ? 0.0 : -128.0;
    const double hi = c == 0 ? 100.0 : 128.0;
    std::array<double, 8> hist{};
    for (const auto& v : lab) {
      const int bin = std::clamp(
          static_cast<int>((channel(v, c) - lo) / (hi - lo) * 8.0), 0, 7);
      hist[bin] += 1.0;
    }
    for (int b = 0; b < 8; ++b) raw[6 + 8 * c + b] = hist[b] / static_cast<double>(npix);
  }

  // --- frequency block ----------------------------------------------------
  const img::ImageGray gray64 = img::to_gray(img::resize_bilinear(crop, 64, 64));
  const std::array<double, 16> freq = frequency_bins(gray64);
  for (int i = 0; i < 16; ++i) raw[30 + i] = freq[i];

  // --- shape blocks -------------------------------------------------------
  const img::ImageGray gray128 = img::to_gray(rgb128);
  const img::BinaryMask mask = shape::binarize_otsu(gray128);
  if (shape::count_foreground(mask) > 0) {
    const img::BinaryMask comp = shape::largest_component(mask);
    const shape::Polygon contour = shape::trace_boundary(comp);
    const double area = shape::polygon_area(contour);
    const double perim = shape::polygon_perimeter(contour);
    raw[46] = area / (128.0 * 128.0);
    raw[47] = perim > 0.0 ? 4.0 * std::numbers::pi * area / (perim * perim) : 0.0;
    const shape::Polygon approx = shape::approximate_polygon(contour, 0.01 * perim);
    raw[48] = std::clamp(static_cast<double>(approx.size()) / 32.0, 0.0, 1.0);
    const shape::Polygon hull = shape::convex_hull(contour);
    const double hull_area = shape::polygon_area(hull);
    const double hull_perim = shape::polygon_perimeter(hull);
    raw[49] = hull_area > 0.0 ? area / hull_area : 0.0;
    raw[50] = perim > 0.0 ? hull_perim / perim : 0.0;
    const std::array<double, 7> hu = shape::hu_moments(mask);
    for (int i = 0; i < 7; ++i) {
      const double h = hu[i];
      const double sign = h > 0.0 ? 1.0 : (h < 0.0 ? -1.0 : 0.0);
      const double mapped = -sign * std::log10(std::abs(h) + 1e-30) / 40.0;
      raw[51 + i] = std::clamp(mapped, -1.0, 1.0);
    }
  }
  // else: blank or single-color crop; shape blocks stay zero.

  return FeatureVector::normalized(raw);
}

}  // namespace divetrack
