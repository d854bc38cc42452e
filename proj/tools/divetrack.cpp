// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 divetrack contributors
//
// Command-line driver. Subcommands:
//   track     associate detections into identity-consistent tracks
//   eval      score a tracker output file against ground truth
//   simulate  generate synthetic scenarios
//   features  compute appearance descriptors from frame images
//
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <divetrack/core.hpp>
#include <divetrack/features.hpp>
#include <divetrack/image.hpp>
#include <divetrack/io.hpp>
#include <divetrack/metrics.hpp>
#include <divetrack/simulate.hpp>
#include <divetrack/tracker.hpp>
#include <divetrack/version.hpp>

namespace dt = divetrack;

namespace {

/// Fills in det.feature for every detection by cropping frame images named
/// %06d.ppm. Frames are distributed over a small worker pool; each worker
/// owns whole frames, so writes never race.
void extract_from_images(const std::filesystem::path& images_dir,
                         dt::io::FrameDetections& detections, int threads) {
  std::vector<int> frames;
  frames.reserve(detections.size());
  for (const auto& [frame, dets] : detections) frames.push_back(frame);

  const auto process_frame = [&](int frame) {
    const std::filesystem::path path = images_dir / dt::sim::frame_filename(frame);
    if (!std::filesystem::exists(path))
      throw dt::io_error("no frame image for frame " + std::to_string(frame) + ": " +
                         path.string());
    const dt::img::ImageRgb image = dt::img::read_ppm(path);
    for (dt::Detection& det : detections.at(frame))
      det.feature = dt::extract_features(dt::img::crop_clamped(image, det.box));
  };

  if (threads <= 1) {
    for (const int frame : frames) process_frame(frame);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next++; i < frames.size(); i = next++) process_frame(frames[i]);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  for (std::thread& worker : pool) worker.join();
  for (const std::exception_ptr& error : errors)
    if (error) std::rethrow_exception(error);
}

struct TrackArgs {
  std::string detections;
  std::string features;
  std::string images;
  std::string config;
  std::string out;
  std::string manifest;
  std::string emit = "confirmed";
  bool no_recovery = false;
  bool streaming = false;
  int threads = 1;
};

void run_track(const TrackArgs& args) {
  dt::io::FrameDetections detections = dt::io::load_detections(args.detections);
  if (!args.features.empty())
    dt::io::load_features(args.features, detections);
  else
    extract_from_images(args.images, detections, args.threads);

  dt::io::RunConfig config;
  if (!args.config.empty()) dt::io::apply_config_file(args.config, config);
  if (args.no_recovery) config.tracker.identity_recovery_enabled = false;

  dt::Tracker tracker(config.tracker, config.noise);
  const int last_frame = detections.empty() ? 0 : detections.rbegin()->first;
  std::vector<dt::FrameAssignments> output;
  std::vector<double> frame_ms;
  output.reserve(static_cast<std::size_t>(last_frame));
  frame_ms.reserve(static_cast<std::size_t>(last_frame));
  static const std::vector<dt::Detection> kNone;
  for (int frame = 1; frame <= last_frame; ++frame) {
    const auto it = detections.find(frame);
    const std::vector<dt::Detection>& dets = it == detections.end() ? kNone : it->second;
    const auto start = std::chrono::steady_clock::now();
    dt::FrameAssignments assignments = tracker.step(frame, dets);
    const auto stop = std::chrono::steady_clock::now();
    frame_ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    if (args.emit == "confirmed")
      std::erase_if(assignments.entries,
                    [](const dt::AssignmentEntry& entry) { return entry.provisional; });
    output.push_back(std::move(assignments));
  }

  if (!args.streaming) {
    // Batch mode: absorbed ids are rewritten across the whole file so each
    // physical target ends up under one id.
    std::map<int, int> remap;
    for (const dt::MergeEvent& event : tracker.merge_events())
      remap[event.absorbed_id] = event.surviving_id;
    const auto resolve = [&remap](int id) {
      while (remap.contains(id)) id = remap.at(id);
      return id;
    };
    for (dt::FrameAssignments& fa : output)
      for (dt::AssignmentEntry& entry : fa.entries) entry.track_id = resolve(entry.track_id);
  }
  dt::io::write_tracks(args.out, output);

  if (!args.manifest.empty()) {
    nlohmann::ordered_json manifest;
    manifest["version"] = dt::kVersion;
    nlohmann::ordered_json inputs;
    inputs["detections"] = args.detections;
    if (!args.features.empty()) inputs["features"] = args.features;
    if (!args.images.empty()) inputs["images"] = args.images;
    if (!args.config.empty()) inputs["config"] = args.config;
    manifest["inputs"] = std::move(inputs);
    const dt::TrackerConfig& t = config.tracker;
    manifest["config"] = {{"iou_threshold", t.iou_threshold},
                          {"location_gate", t.location_gate},
                          {"appearance_gate_short", t.appearance_gate_short},
                          {"appearance_gate_long", t.appearance_gate_long},
                          {"long_term_after", t.long_term_after},
                          {"gallery_capacity", t.gallery_capacity},
                          {"confirm_after", t.confirm_after},
                          {"new_track_window", t.new_track_window},
                          {"merge_fraction", t.merge_fraction},
                          {"identity_recovery_enabled", t.identity_recovery_enabled},
                          {"noise_position_ratio", config.noise.position_ratio},
                          {"noise_velocity_ratio", config.noise.velocity_ratio},
                          {"noise_measurement_ratio", config.noise.measurement_ratio},
                          {"noise_fallback_height", config.noise.fallback_height}};
    manifest["emit"] = args.emit;
    manifest["streaming"] = args.streaming;
    manifest["frames"] = frame_ms.size();
    manifest["frame_times_ms"] = frame_ms;
    nlohmann::ordered_json merges = nlohmann::ordered_json::array();
    for (const dt::MergeEvent& event : tracker.merge_events())
      merges.push_back({{"frame", event.frame},
                        {"absorbed", event.absorbed_id},
                        {"survivor", event.surviving_id}});
    manifest["merge_events"] = std::move(merges);
    std::ofstream file(args.manifest);
    if (!file) throw dt::io_error("cannot open for writing: " + args.manifest);
    file << manifest.dump(2) << "\n";
  }
}

struct EvalArgs {
  std::string gt;
  std::string result;
  std::string out;
  double iou_min = 0.5;
};

void run_eval(const EvalArgs& args) {
  const dt::GroundTruth gt = dt::io::load_ground_truth(args.gt);
  const dt::GroundTruth result = dt::io::load_ground_truth(args.result);
  const dt::metrics::MetricsReport report = dt::metrics::evaluate(gt, result, args.iou_min);
  std::cout << dt::metrics::format_table(report);
  if (!args.out.empty()) {
    std::ofstream file(args.out);
    if (!file) throw dt::io_error("cannot open for writing: " + args.out);
    file << dt::metrics::format_key_values(report);
  }
}

struct SimulateArgs {
  std::string scenario;
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

void run_simulate(const SimulateArgs& args) {
  dt::sim::ScenarioConfig config;
  if (!args.scenario.empty()) {
    const auto all = dt::sim::builtin_scenarios();
    const auto it = all.find(args.scenario);
    if (it == all.end()) {
      std::string names;
      for (const auto& [name, unused] : all) names += (names.empty() ? "" : ", ") + name;
      throw std::invalid_argument("unknown scenario '" + args.scenario +
                                  "'; available: " + names);
    }
    config = it->second;
  } else {
    config = dt::sim::load_scenario(args.config);
  }
  if (args.seed_given) config.seed = args.seed;
  const dt::sim::GeneratedPaths paths = dt::sim::generate(config, args.out);
  std::cout << "wrote " << paths.detections.string() << "\n";
  std::cout << "wrote " << paths.features.string() << "\n";
  std::cout << "wrote " << paths.gt.string() << "\n";
  if (!paths.frames_dir.empty())
    std::cout << "wrote " << paths.frames_dir.string() << "/ (" << config.frames
              << " frames)\n";
}

struct FeaturesArgs {
  std::string detections;
  std::string images;
  std::string out;
  int threads = 1;
};

void run_features(const FeaturesArgs& args) {
  dt::io::FrameDetections detections = dt::io::load_detections(args.detections);
  extract_from_images(args.images, detections, args.threads);
  dt::io::write_feature_sidecar(args.out, detections);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"divetrack: appearance-assisted multi-object tracking"};
  app.set_version_flag("--version", DIVETRACK_VERSION);
  app.require_subcommand(1);

  TrackArgs track_args;
  CLI::App* track = app.add_subcommand("track", "run the tracker over a detection file");
  track->add_option("--detections", track_args.detections, "detection file (10-column CSV)")
      ->required();
  CLI::Option_group* source = track->add_option_group("feature source");
  source->add_option("--features", track_args.features, "precomputed feature sidecar");
  source->add_option("--images", track_args.images, "frame image directory (%06d.ppm)");
  source->require_option(1);
  track->add_option("--config", track_args.config, "tracker config (key = value lines)");
  track->add_option("--out", track_args.out, "output track file")->required();
  track->add_option("--emit", track_args.emit, "which tracks to emit")
      ->check(CLI::IsMember({"confirmed", "tentative"}))
      ->capture_default_str();
  track->add_flag("--no-identity-recovery", track_args.no_recovery,
                  "disable the identity recovery merge pass");
  track->add_flag("--streaming", track_args.streaming,
                  "do not rewrite ids of already-emitted frames after merges");
  track->add_option("--manifest", track_args.manifest, "write a JSON run manifest");
  track->add_option("--threads", track_args.threads, "feature extraction workers")
      ->check(CLI::PositiveNumber);
  track->callback([&track_args] { run_track(track_args); });

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "score a track file against ground truth");
  eval->add_option("--gt", eval_args.gt, "ground-truth file")->required();
  eval->add_option("--result", eval_args.result, "tracker output file")->required();
  eval->add_option("--iou-min", eval_args.iou_min, "box agreement threshold")
      ->capture_default_str()
      ->check(CLI::Range(1e-9, 1.0).description("FLOAT in (0, 1]"));
  eval->add_option("--out", eval_args.out, "also write NAME=value report here");
  eval->callback([&eval_args] { run_eval(eval_args); });

  SimulateArgs sim_args;
  CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic scenario");
  CLI::Option_group* which = simulate->add_option_group("scenario source");
  which->add_option("--scenario", sim_args.scenario, "built-in scenario name");
  which->add_option("--config", sim_args.config, "scenario file (key = value lines)");
  which->require_option(1);
  CLI::Option* seed =
      simulate->add_option("--seed", sim_args.seed, "override the scenario seed");
  simulate->add_option("--out", sim_args.out, "output directory")->required();
  simulate->callback([&sim_args, seed] {
    sim_args.seed_given = seed->count() > 0;
    run_simulate(sim_args);
  });

  FeaturesArgs feat_args;
  CLI::App* features =
      app.add_subcommand("features", "extract appearance features from frame images");
  features->add_option("--detections", feat_args.detections, "detection file")->required();
  features->add_option("--images", feat_args.images, "frame image directory (%06d.ppm)")
      ->required();
  features->add_option("--out", feat_args.out, "output feature sidecar")->required();
  features->add_option("--threads", feat_args.threads, "extraction workers")
      ->check(CLI::PositiveNumber);
  features->callback([&feat_args] { run_features(feat_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "divetrack: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
