// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 divetrack contributors
//
// Deterministic synthetic scenarios: moving targets with piecewise-linear
// paths, configurable absences and appearance changes, detector jitter,
// misses and false positives. Scenarios stand in for real footage in tests;
// given the same seed they reproduce byte-identical files.
//
// Per frame, random draws happen in this fixed order (see rng.hpp for the
// generator pinning): for each present target in declaration order — jitter
// dx, jitter dy (gaussians), miss test (uniform), then 58 feature-noise
// gaussians if the detection is kept; after all targets — false-positive
// test (uniform), and if it fires: box width, height, left, top (uniforms)
// followed by 58 feature gaussians. Absent targets consume nothing.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <divetrack/core.hpp>
#include <divetrack/image.hpp>
#include <divetrack/io.hpp>
#include <divetrack/rng.hpp>

namespace divetrack::sim {

/// Unit vector along one feature axis.
inline FeatureVector axis_feature(std::size_t axis) {
  if (axis >= kFeatureDim) throw std::invalid_argument("axis_feature: axis out of range");
  std::array<double, kFeatureDim> raw{};
  raw[axis] = 1.0;
  return FeatureVector::normalized(raw);
}

struct FeatureShift {
  int start = 0;  // inclusive
  int end = 0;    // inclusive
  FeatureVector direction;
};

struct TargetSpec {
  int id = 0;
  FeatureVector base_feature;
  std::vector<std::array<double, 3>> waypoints;  // (frame, x, y), frame ascending
  double box_width = 0.0;
  double box_height = 0.0;
  std::vector<std::pair<int, int>> absences;  // inclusive intervals
  std::vector<FeatureShift> shifts;
  std::array<std::uint8_t, 3> color{200, 200, 200};  // rendered scenarios only

  bool present(int frame) const {
    for (const auto& [start, end] : absences)
      if (frame >= start && frame <= end) return false;
    return true;
  }

  const FeatureVector& active_feature(int frame) const {
    for (const FeatureShift& shift : shifts)
      if (frame >= shift.start && frame <= shift.end) return shift.direction;
    return base_feature;
  }

  /// Piecewise-linear interpolation over the waypoints, clamped at the ends.
  std::pair<double, double> center(int frame) const {
    const double f = static_cast<double>(frame);
    if (f <= waypoints.front()[0]) return {waypoints.front()[1], waypoints.front()[2]};
    for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
      const auto& a = waypoints[i];
      const auto& b = waypoints[i + 1];
      if (f <= b[0]) {
        const double t = (f - a[0]) / (b[0] - a[0]);
        return {a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])};
      }
    }
    return {waypoints.back()[1], waypoints.back()[2]};
  }

  BoundingBox ideal_box(int frame) const {
    const auto [cx, cy] = center(frame);
    return {cx - box_width / 2.0, cy - box_height / 2.0, box_width, box_height};
  }
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  int frames = 0;
  int image_width = 640;
  int image_height = 480;
  double miss_rate = 0.0;            // per-detection drop probability
  double false_positive_rate = 0.0;  // per-frame injection probability
  double jitter_std = 0.0;           // detection center noise, pixels
  double feature_noise_std = 0.0;
  bool render = false;  // also write frames/%06d.ppm
  std::vector<TargetSpec> targets;

  void validate() const {
    if (frames < 1) throw std::invalid_argument("scenario: frames must be >= 1");
    if (image_width < 16 || image_height < 16)
      throw std::invalid_argument("scenario: image size must be at least 16x16");
    const auto rate = [](double v, const char* name) {
      if (!(v >= 0.0 && v < 1.0))
        throw std::invalid_argument(std::string("scenario: ") + name + " must lie in [0, 1)");
    };
    rate(miss_rate, "miss_rate");
    rate(false_positive_rate, "false_positive_rate");
    if (jitter_std < 0.0 || feature_noise_std < 0.0)
      throw std::invalid_argument("scenario: noise levels must be >= 0");
    if (targets.empty()) throw std::invalid_argument("scenario: no targets");
    std::vector<int> ids;
    for (const TargetSpec& target : targets) {
      if (target.id <= 0) throw std::invalid_argument("scenario: target ids must be positive");
      ids.push_back(target.id);
      if (target.box_width <= 0.0 || target.box_height <= 0.0)
        throw std::invalid_argument("scenario: target box must have positive size");
      if (target.waypoints.empty())
        throw std::invalid_argument("scenario: target needs at least one waypoint");
      for (std::size_t i = 1; i < target.waypoints.size(); ++i)
        if (target.waypoints[i][0] <= target.waypoints[i - 1][0])
          throw std::invalid_argument("scenario: waypoints must be strictly increasing in frame");
      for (const auto& [start, end] : target.absences)
        if (end < start) throw std::invalid_argument("scenario: malformed absence interval");
      for (std::size_t i = 1; i < target.absences.size(); ++i)
        if (target.absences[i].first <= target.absences[i - 1].second)
          throw std::invalid_argument("scenario: absence intervals must be disjoint");
      for (const FeatureShift& shift : target.shifts)
        if (shift.end < shift.start)
          throw std::invalid_argument("scenario: malformed feature-shift interval");
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
      throw std::invalid_argument("scenario: duplicate target ids");
  }
};

struct SyntheticData {
  io::FrameDetections detections;  // features populated
  GroundTruth gt;
};

/// Runs the generator in memory.
inline SyntheticData generate_data(const ScenarioConfig& config) {
  config.validate();
  SyntheticData data;
  Rng rng(config.seed);
  std::array<double, kFeatureDim> noise{};
  for (int frame = 1; frame <= config.frames; ++frame) {
    for (const TargetSpec& target : config.targets) {
      if (!target.present(frame)) continue;
      const BoundingBox ideal = target.ideal_box(frame);
      data.gt[frame].push_back({target.id, ideal});

      const double dx = rng.gaussian() * config.jitter_std;
      const double dy = rng.gaussian() * config.jitter_std;
      if (rng.uniform() < config.miss_rate) continue;

      const FeatureVector& direction = target.active_feature(frame);
      for (std::size_t i = 0; i < kFeatureDim; ++i)
        noise[i] = direction[i] + rng.gaussian() * config.feature_noise_std;
      Detection det;
      det.frame = frame;
      det.box = {ideal.left + dx, ideal.top + dy, ideal.width, ideal.height};
      det.confidence = 1.0;
      det.feature = FeatureVector::normalized(noise);
      data.detections[frame].push_back(std::move(det));
    }
    if (rng.uniform() < config.false_positive_rate) {
      const double bw = 16.0 + rng.uniform() * 48.0;
      const double bh = 16.0 + rng.uniform() * 48.0;
      const double left = rng.uniform() * (config.image_width - bw);
      const double top = rng.uniform() * (config.image_height - bh);
      for (std::size_t i = 0; i < kFeatureDim; ++i) noise[i] = rng.gaussian();
      Detection det;
      det.frame = frame;
      det.box = {left, top, bw, bh};
      det.confidence = 0.5;
      det.feature = FeatureVector::normalized(noise);
      data.detections[frame].push_back(std::move(det));
    }
  }
  return data;
}

/// Renders one frame as flat disks on a dark background (for scenarios with
/// render enabled).
inline img::ImageRgb render_frame(const ScenarioConfig& config, int frame) {
  img::ImageRgb image(config.image_width, config.image_height);
  constexpr std::array<std::uint8_t, 3> background{28, 32, 40};
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      std::uint8_t* p = image.at(x, y);
      p[0] = background[0];
      p[1] = background[1];
      p[2] = background[2];
    }
  for (const TargetSpec& target : config.targets) {
    if (!target.present(frame)) continue;
    const auto [cx, cy] = target.center(frame);
    const double radius = 0.375 * std::min(target.box_width, target.box_height);
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - radius)));
    const int x1 = std::min(image.width - 1, static_cast<int>(std::ceil(cx + radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - radius)));
    const int y1 = std::min(image.height - 1, static_cast<int>(std::ceil(cy + radius)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double ddx = x - cx;
        const double ddy = y - cy;
        if (ddx * ddx + ddy * ddy > radius * radius) continue;
        std::uint8_t* p = image.at(x, y);
        p[0] = target.color[0];
        p[1] = target.color[1];
        p[2] = target.color[2];
      }
  }
  return image;
}

struct GeneratedPaths {
  std::filesystem::path detections;
  std::filesystem::path features;
  std::filesystem::path gt;
  std::filesystem::path frames_dir;  // empty unless rendered
};

inline std::string frame_filename(int frame) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06d.ppm", frame);
  return name;
}

/// Generates a scenario into `dir` (created if needed): detections.txt,
/// features.txt, gt.txt, and frames/%06d.ppm when rendering.
inline GeneratedPaths generate(const ScenarioConfig& config, const std::filesystem::path& dir) {
  const SyntheticData data = generate_data(config);  // validates first
  std::filesystem::create_directories(dir);
  GeneratedPaths paths;
  paths.detections = dir / "detections.txt";
  paths.features = dir / "features.txt";
  paths.gt = dir / "gt.txt";
  io::write_detections(paths.detections, data.detections);
  io::write_feature_sidecar(paths.features, data.detections);
  io::write_ground_truth(paths.gt, data.gt);
  if (config.render) {
    paths.frames_dir = dir / "frames";
    std::filesystem::create_directories(paths.frames_dir);
    for (int frame = 1; frame <= config.frames; ++frame)
      img::write_ppm(paths.frames_dir / frame_filename(frame), render_frame(config, frame));
  }
  return paths;
}

namespace detail {

inline TargetSpec make_target(int id, std::size_t axis, double w, double h,
                              std::vector<std::array<double, 3>> waypoints,
                              std::array<std::uint8_t, 3> color = {200, 200, 200}) {
  TargetSpec target;
  target.id = id;
  target.base_feature = axis_feature(axis);
  target.box_width = w;
  target.box_height = h;
  target.waypoints = std::move(waypoints);
  target.color = color;
  return target;
}

}  // namespace detail

/// The built-in scenario suite.
///
///   steady2   — two well-separated targets, no noise of any kind
///   reacquire — one target leaves for 20 frames and returns unchanged,
///               exercising long-term reidentification
///   recovery  — as reacquire, but the returning target looks different for
///               its first five frames, forcing a fresh track that identity
///               recovery must merge back
///   clutter   — three targets with detector misses, false positives, box
///               jitter and feature noise
///   clutter4  — four targets over 500 frames, same noise; sized for
///               throughput measurements
///   rendered2 — two colored disks rendered to PPM frames, for end-to-end
///               runs through the feature extractor
inline std::map<std::string, ScenarioConfig> builtin_scenarios() {
  std::map<std::string, ScenarioConfig> all;

  {
    ScenarioConfig s;
    s.seed = 1001;
    s.frames = 100;
    s.targets.push_back(detail::make_target(1, 0, 60, 80, {{1, 100, 100}, {100, 400, 200}}));
    s.targets.push_back(detail::make_target(2, 1, 64, 72, {{1, 500, 350}, {100, 200, 300}}));
    all["steady2"] = std::move(s);
  }
  {
    ScenarioConfig s;
    s.seed = 1002;
    s.frames = 120;
    s.targets.push_back(detail::make_target(1, 0, 60, 80, {{1, 100, 100}, {120, 400, 220}}));
    TargetSpec t2 = detail::make_target(2, 1, 64, 72, {{1, 500, 350}, {120, 200, 290}});
    t2.absences.push_back({40, 59});
    s.targets.push_back(std::move(t2));
    all["reacquire"] = std::move(s);
  }
  {
    ScenarioConfig s = all["reacquire"];
    s.seed = 1003;
    s.targets[1].shifts.push_back({60, 64, axis_feature(2)});
    all["recovery"] = std::move(s);
  }
  {
    ScenarioConfig s;
    s.seed = 1004;
    s.frames = 200;
    s.miss_rate = 0.05;
    s.false_positive_rate = 0.05;
    s.jitter_std = 1.0;
    s.feature_noise_std = 1e-3;
    s.targets.push_back(detail::make_target(1, 0, 60, 80, {{1, 100, 100}, {200, 540, 140}}));
    s.targets.push_back(detail::make_target(2, 1, 64, 72, {{1, 560, 400}, {200, 120, 360}}));
    s.targets.push_back(detail::make_target(
        3, 2, 56, 64, {{1, 320, 240}, {100, 500, 220}, {200, 320, 260}}));
    all["clutter"] = std::move(s);
  }
  {
    ScenarioConfig s;
    s.seed = 1005;
    s.frames = 500;
    s.miss_rate = 0.05;
    s.false_positive_rate = 0.05;
    s.jitter_std = 1.0;
    s.feature_noise_std = 1e-3;
    s.targets.push_back(detail::make_target(1, 0, 60, 80, {{1, 80, 80}, {500, 560, 100}}));
    s.targets.push_back(detail::make_target(2, 1, 64, 72, {{1, 560, 440}, {500, 100, 420}}));
    s.targets.push_back(detail::make_target(3, 2, 56, 64, {{1, 100, 300}, {500, 540, 280}}));
    s.targets.push_back(detail::make_target(4, 3, 48, 56, {{1, 540, 200}, {500, 120, 190}}));
    all["clutter4"] = std::move(s);
  }
  {
    ScenarioConfig s;
    s.seed = 1006;
    s.frames = 60;
    s.image_width = 320;
    s.image_height = 240;
    s.render = true;
    s.targets.push_back(
        detail::make_target(1, 0, 64, 64, {{1, 60, 60}, {60, 178, 119}}, {200, 60, 50}));
    s.targets.push_back(
        detail::make_target(2, 1, 64, 64, {{1, 260, 200}, {60, 142, 200}}, {50, 90, 200}));
    all["rendered2"] = std::move(s);
  }
  return all;
}

/// Loads a scenario from the flat key/value format. Repeated `target.N.*`
/// keys build up targets; waypoints use `frame:x,y`, absences `start:end`,
/// shifts `start:end:axis`, colors `r,g,b`.
inline ScenarioConfig load_scenario(const std::filesystem::path& path) {
  ScenarioConfig config;
  std::map<int, TargetSpec> targets;
  const std::string name = path.string();

  for (const io::KeyValue& kv : io::load_key_values(path)) {
    const auto fail = [&](const std::string& what) {
      return parse_error(name, kv.line, what);
    };
    const auto real = [&] { return io::detail::parse_real(kv.value, name, kv.line); };
    const auto integer = [&] { return io::detail::parse_int(kv.value, name, kv.line); };

    if (kv.key == "seed") {
      config.seed = static_cast<std::uint64_t>(integer());
    } else if (kv.key == "frames") {
      config.frames = integer();
    } else if (kv.key == "image_width") {
      config.image_width = integer();
    } else if (kv.key == "image_height") {
      config.image_height = integer();
    } else if (kv.key == "miss_rate") {
      config.miss_rate = real();
    } else if (kv.key == "false_positive_rate") {
      config.false_positive_rate = real();
    } else if (kv.key == "jitter_std") {
      config.jitter_std = real();
    } else if (kv.key == "feature_noise_std") {
      config.feature_noise_std = real();
    } else if (kv.key == "render") {
      config.render = io::detail::parse_bool(kv.value, name, kv.line);
    } else if (kv.key.starts_with("target.")) {
      const auto rest = kv.key.substr(7);
      const auto dot = rest.find('.');
      if (dot == std::string::npos) throw fail("malformed target key: " + kv.key);
      const int index = io::detail::parse_int(rest.substr(0, dot), name, kv.line);
      const std::string field = rest.substr(dot + 1);
      TargetSpec& target = targets[index];
      if (field == "id") {
        target.id = integer();
      } else if (field == "feature_axis") {
        target.base_feature = axis_feature(static_cast<std::size_t>(integer()));
      } else if (field == "box_width") {
        target.box_width = real();
      } else if (field == "box_height") {
        target.box_height = real();
      } else if (field == "waypoint") {
        const auto colon = io::detail::split(kv.value, ':');
        if (colon.size() != 2) throw fail("waypoint must be frame:x,y");
        const auto xy = io::detail::split(colon[1], ',');
        if (xy.size() != 2) throw fail("waypoint must be frame:x,y");
        target.waypoints.push_back(
            {static_cast<double>(io::detail::parse_int(colon[0], name, kv.line)),
             io::detail::parse_real(xy[0], name, kv.line),
             io::detail::parse_real(xy[1], name, kv.line)});
      } else if (field == "absent") {
        const auto parts = io::detail::split(kv.value, ':');
        if (parts.size() != 2) throw fail("absent must be start:end");
        target.absences.emplace_back(io::detail::parse_int(parts[0], name, kv.line),
                                     io::detail::parse_int(parts[1], name, kv.line));
      } else if (field == "shift") {
        const auto parts = io::detail::split(kv.value, ':');
        if (parts.size() != 3) throw fail("shift must be start:end:axis");
        FeatureShift shift;
        shift.start = io::detail::parse_int(parts[0], name, kv.line);
        shift.end = io::detail::parse_int(parts[1], name, kv.line);
        shift.direction = axis_feature(
            static_cast<std::size_t>(io::detail::parse_int(parts[2], name, kv.line)));
        target.shifts.push_back(std::move(shift));
      } else if (field == "color") {
        const auto parts = io::detail::split(kv.value, ',');
        if (parts.size() != 3) throw fail("color must be r,g,b");
        for (int c = 0; c < 3; ++c) {
          const int v = io::detail::parse_int(parts[c], name, kv.line);
          if (v < 0 || v > 255) throw fail("color components must lie in [0, 255]");
          target.color[c] = static_cast<std::uint8_t>(v);
        }
      } else {
        throw fail("unknown target field: " + field);
      }
    } else {
      throw fail("unknown scenario key: " + kv.key);
    }
  }
  for (auto& [index, target] : targets) config.targets.push_back(std::move(target));
  config.validate();
  return config;
}

}  // namespace divetrack::sim
