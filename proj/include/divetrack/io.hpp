// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 divetrack contributors
//
// MOT-format file ingestion and emission.
//
// Detection / result / ground-truth files are 10-column MOT16 CSV:
//   frame,id,left,top,width,height,conf,x,y,z
// On detection input the id and x,y,z columns are ignored (conventionally -1).
// The feature sidecar holds one 58-column CSV row per detection, in detection
// file order (frame ascending, file order within a frame).
//
// Config files are flat `key = value` text; `#` starts a comment.

#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <divetrack/core.hpp>
#include <divetrack/kalman.hpp>

namespace divetrack::io {

using FrameDetections = std::map<int, std::vector<Detection>>;

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

inline double parse_real(const std::string& s, const std::string& file, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw parse_error(file, line, "not a number: '" + s + "'");
  }
}

inline int parse_int(const std::string& s, const std::string& file, std::size_t line) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw parse_error(file, line, "not an integer: '" + s + "'");
  return v;
}

struct MotRow {
  int frame;
  int id;
  BoundingBox box;
  double confidence;
};

inline MotRow parse_mot_row(const std::string& text, const std::string& file,
                            std::size_t line_no) {
  const auto fields = split(text, ',');
  if (fields.size() != 10)
    throw parse_error(file, line_no,
                      "expected 10 comma-separated fields, got " +
                          std::to_string(fields.size()));
  MotRow row;
  row.frame = parse_int(fields[0], file, line_no);
  row.id = parse_int(fields[1], file, line_no);
  row.box.left = parse_real(fields[2], file, line_no);
  row.box.top = parse_real(fields[3], file, line_no);
  row.box.width = parse_real(fields[4], file, line_no);
  row.box.height = parse_real(fields[5], file, line_no);
  row.confidence = parse_real(fields[6], file, line_no);
  if (row.frame < 1) throw parse_error(file, line_no, "frame index must be >= 1");
  if (!(row.box.width > 0.0) || !(row.box.height > 0.0))
    throw parse_error(file, line_no, "box width and height must be > 0");
  if (!(row.confidence >= 0.0 && row.confidence <= 1.0))
    throw parse_error(file, line_no, "confidence must be in [0, 1]");
  return row;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open for reading: " + path.string());
  return in;
}

}  // namespace detail

/// Reads a MOT detection file into per-frame detection lists. File order is
/// preserved within each frame; the id and x,y,z columns are ignored.
inline FrameDetections load_detections(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  FrameDetections out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto row = detail::parse_mot_row(line, path.string(), line_no);
    Detection det;
    det.frame = row.frame;
    det.box = row.box;
    det.confidence = row.confidence;
    out[row.frame].push_back(std::move(det));
  }
  return out;
}

/// Reads a ground-truth (or tracker result) file; the id column is meaningful.
inline GroundTruth load_ground_truth(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  GroundTruth out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto row = detail::parse_mot_row(line, path.string(), line_no);
    out[row.frame].push_back(IdBox{row.id, row.box});
  }
  return out;
}

/// Attaches L2-normalized features from a sidecar CSV to already-loaded
/// detections. One row per detection, frame-ascending detection order. The
/// row count must match the detection count exactly.
inline void load_features(const std::filesystem::path& path, FrameDetections& detections) {
  auto in = detail::open_input(path);
  std::size_t total = 0;
  for (const auto& [frame, dets] : detections) total += dets.size();

  std::vector<FeatureVector> features;
  features.reserve(total);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split(line, ',');
    if (fields.size() != kFeatureDim)
      throw parse_error(path.string(), line_no,
                        "expected " + std::to_string(kFeatureDim) +
                            " feature components, got " + std::to_string(fields.size()));
    std::vector<double> raw(kFeatureDim);
    for (std::size_t i = 0; i < kFeatureDim; ++i)
      raw[i] = detail::parse_real(fields[i], path.string(), line_no);
    try {
      features.push_back(FeatureVector::normalized(raw));
    } catch (const std::invalid_argument& e) {
      throw parse_error(path.string(), line_no, e.what());
    }
  }
  if (features.size() != total)
    throw parse_error(path.string() + ": feature row count mismatch: expected " +
                      std::to_string(total) + ", found " + std::to_string(features.size()));

  std::size_t next = 0;
  for (auto& [frame, dets] : detections)
    for (auto& det : dets) det.feature = features[next++];
}

/// Writes per-frame assignments as MOT16 result CSV, sorted by frame then
/// track id, two decimal places. Output is byte-identical across runs for
/// identical inputs.
inline void write_tracks(const std::filesystem::path& path,
                         const std::vector<FrameAssignments>& results) {
  std::vector<std::pair<int, const AssignmentEntry*>> rows;
  for (const auto& fa : results)
    for (const auto& entry : fa.entries) {
      if (entry.track_id <= 0)
        throw std::invalid_argument("write_tracks: track id must be positive");
      rows.emplace_back(fa.frame, &entry);
    }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second->track_id < b.second->track_id;
  });

  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path.string());
  char buf[256];
  for (const auto& [frame, entry] : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.2f,%.2f,%.2f,%.2f,%.2f,-1,-1,-1\n", frame,
                  entry->track_id, entry->box.left, entry->box.top, entry->box.width,
                  entry->box.height, entry->confidence);
    out << buf;
  }
  if (!out) throw io_error("write failed: " + path.string());
}

/// Writes a detection file (id column -1) plus an optional parallel feature
/// sidecar; used by the scenario generator.
inline void write_detections(const std::filesystem::path& path,
                             const FrameDetections& detections) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path.string());
  char buf[256];
  for (const auto& [frame, dets] : detections) {
    for (const auto& det : dets) {
      std::snprintf(buf, sizeof(buf), "%d,-1,%.2f,%.2f,%.2f,%.2f,%.2f,-1,-1,-1\n", frame,
                    det.box.left, det.box.top, det.box.width, det.box.height,
                    det.confidence);
      out << buf;
    }
  }
  if (!out) throw io_error("write failed: " + path.string());
}

inline void write_feature_sidecar(const std::filesystem::path& path,
                                  const FrameDetections& detections) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path.string());
  char buf[64];
  for (const auto& [frame, dets] : detections) {
    for (const auto& det : dets) {
      if (!det.feature)
        throw std::invalid_argument("write_feature_sidecar: detection without feature");
      for (std::size_t i = 0; i < kFeatureDim; ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", det.feature->values[i]);
        out << (i ? "," : "") << buf;
      }
      out << '\n';
    }
  }
  if (!out) throw io_error("write failed: " + path.string());
}

inline void write_ground_truth(const std::filesystem::path& path, const GroundTruth& gt) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path.string());
  char buf[256];
  for (const auto& [frame, boxes] : gt) {
    for (const auto& b : boxes) {
      std::snprintf(buf, sizeof(buf), "%d,%d,%.2f,%.2f,%.2f,%.2f,1.00,-1,-1,-1\n", frame,
                    b.id, b.box.left, b.box.top, b.box.width, b.box.height);
      out << buf;
    }
  }
  if (!out) throw io_error("write failed: " + path.string());
}

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Flat `key = value` file, comments with '#'. Returns entries in file order.
inline std::vector<KeyValue> load_key_values(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::vector<KeyValue> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw parse_error(path.string(), line_no, "expected 'key = value'");
    auto key = detail::trim(std::string_view(text).substr(0, eq));
    auto value = detail::trim(std::string_view(text).substr(eq + 1));
    if (key.empty()) throw parse_error(path.string(), line_no, "empty key");
    out.push_back(KeyValue{std::move(key), std::move(value), line_no});
  }
  return out;
}

namespace detail {

inline bool parse_bool(const std::string& s, const std::string& file, std::size_t line) {
  if (s == "true" || s == "on" || s == "1") return true;
  if (s == "false" || s == "off" || s == "0") return false;
  throw parse_error(file, line, "not a boolean: '" + s + "'");
}

}  // namespace detail

/// Tracker + noise configuration bundle as read from a config file.
struct RunConfig {
  TrackerConfig tracker;
  kalman::NoiseScales noise;
};

/// Applies a config file on top of the given defaults. Unknown keys are
/// rejected so typos do not silently fall back to defaults.
inline void apply_config_file(const std::filesystem::path& path, RunConfig& config) {
  const std::string file = path.string();
  for (const auto& [key, value, line_no] : load_key_values(path)) {
    auto real = [&, line_no = line_no] { return detail::parse_real(value, file, line_no); };
    auto integer = [&, line_no = line_no] { return detail::parse_int(value, file, line_no); };
    if (key == "iou_threshold") config.tracker.iou_threshold = real();
    else if (key == "location_gate") config.tracker.location_gate = real();
    else if (key == "appearance_gate_short") config.tracker.appearance_gate_short = real();
    else if (key == "appearance_gate_long") config.tracker.appearance_gate_long = real();
    else if (key == "long_term_after") config.tracker.long_term_after = integer();
    else if (key == "gallery_capacity") config.tracker.gallery_capacity = integer();
    else if (key == "confirm_after") config.tracker.confirm_after = integer();
    else if (key == "new_track_window") config.tracker.new_track_window = integer();
    else if (key == "merge_fraction") config.tracker.merge_fraction = real();
    else if (key == "identity_recovery_enabled")
      config.tracker.identity_recovery_enabled = detail::parse_bool(value, file, line_no);
    else if (key == "noise_position_ratio") config.noise.position_ratio = real();
    else if (key == "noise_velocity_ratio") config.noise.velocity_ratio = real();
    else if (key == "noise_measurement_ratio") config.noise.measurement_ratio = real();
    else if (key == "noise_fallback_height") config.noise.fallback_height = real();
    else
      throw parse_error(file, line_no, "unknown config key: '" + key + "'");
  }
  config.tracker.validate();
}

}  // namespace divetrack::io
