// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 divetrack contributors
//
// Minimal dependency-free image support: 8-bit RGB buffers, binary PPM (P6)
// decode/encode, bilinear resize, luma conversion and box cropping. Enough to
// feed the feature extractor without an imaging library.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <divetrack/core.hpp>

namespace divetrack::img {

/// Row-major 8-bit RGB image. Doubles as the detector crop type.
struct ImageRgb {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // 3 bytes per pixel, row-major

  ImageRgb() = default;
  ImageRgb(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3) {}

  std::uint8_t* at(int x, int y) {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  bool empty() const { return width <= 0 || height <= 0; }
};

/// Row-major single-channel 8-bit image.
struct ImageGray {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  ImageGray() = default;
  ImageGray(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h) {}

  std::uint8_t& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
};

/// Binary foreground mask; nonzero = foreground.
using BinaryMask = ImageGray;

namespace detail {

inline int read_ppm_token(std::istream& in, const std::string& path) {
  // Skips whitespace and '#' comments between header tokens.
  while (true) {
    const int c = in.peek();
    if (c == EOF) throw parse_error(path + ": truncated PPM header");
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
      continue;
    }
    if (std::isspace(c)) {
      in.get();
      continue;
    }
    break;
  }
  int value = 0;
  in >> value;
  if (!in) throw parse_error(path + ": malformed PPM header");
  return value;
}

}  // namespace detail

/// Reads a binary PPM (P6, maxval <= 255).
inline ImageRgb read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open for reading: " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P6") throw parse_error(path.string() + ": not a P6 PPM");
  const int width = detail::read_ppm_token(in, path.string());
  const int height = detail::read_ppm_token(in, path.string());
  const int maxval = detail::read_ppm_token(in, path.string());
  if (width <= 0 || height <= 0)
    throw parse_error(path.string() + ": invalid PPM dimensions");
  if (maxval <= 0 || maxval > 255)
    throw parse_error(path.string() + ": unsupported PPM maxval " + std::to_string(maxval));
  in.get();  // single whitespace after maxval
  ImageRgb image(width, height);
  in.read(reinterpret_cast<char*>(image.pixels.data()),
          static_cast<std::streamsize>(image.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(image.pixels.size()))
    throw parse_error(path.string() + ": truncated PPM pixel data");
  return image;
}

inline void write_ppm(const std::filesystem::path& path, const ImageRgb& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path.string());
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw io_error("write failed: " + path.string());
}

/// Bilinear resize with half-pixel centers. Deterministic; used to bring
/// crops of any size onto the fixed analysis grids.
inline ImageRgb resize_bilinear(const ImageRgb& src, int width, int height) {
  if (src.empty()) throw std::invalid_argument("resize_bilinear: empty source");
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("resize_bilinear: non-positive target size");
  ImageRgb dst(width, height);
  const double sx = static_cast<double>(src.width) / width;
  const double sy = static_cast<double>(src.height) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, src.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, src.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double wx = fx - x0;
      const std::uint8_t* p00 = src.at(x0, y0);
      const std::uint8_t* p10 = src.at(x1, y0);
      const std::uint8_t* p01 = src.at(x0, y1);
      const std::uint8_t* p11 = src.at(x1, y1);
      std::uint8_t* q = dst.at(x, y);
      for (int c = 0; c < 3; ++c) {
        const double top = p00[c] + (p10[c] - p00[c]) * wx;
        const double bot = p01[c] + (p11[c] - p01[c]) * wx;
        const double v = top + (bot - top) * wy;
        q[c] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
      }
    }
  }
  return dst;
}

/// Rec.601 luma, rounded to 8 bits.
inline ImageGray to_gray(const ImageRgb& src) {
  ImageGray gray(src.width, src.height);
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x) {
      const std::uint8_t* p = src.at(x, y);
      const double v = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
      gray.at(x, y) = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
    }
  return gray;
}

/// Cuts a detection box out of a frame, clamping the box to image bounds.
/// Throws only if the clamped region is empty.
inline ImageRgb crop_clamped(const ImageRgb& frame, const BoundingBox& box) {
  const int x0 = std::clamp(static_cast<int>(std::floor(box.left)), 0, frame.width);
  const int y0 = std::clamp(static_cast<int>(std::floor(box.top)), 0, frame.height);
  const int x1 = std::clamp(static_cast<int>(std::ceil(box.right())), 0, frame.width);
  const int y1 = std::clamp(static_cast<int>(std::ceil(box.bottom())), 0, frame.height);
  if (x1 <= x0 || y1 <= y0)
    throw std::invalid_argument("crop_clamped: box does not intersect the image");
  ImageRgb crop(x1 - x0, y1 - y0);
  for (int y = y0; y < y1; ++y)
    std::copy(frame.at(x0, y), frame.at(x0, y) + (x1 - x0) * 3, crop.at(0, y - y0));
  return crop;
}

}  // namespace divetrack::img
