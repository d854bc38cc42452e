// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 divetrack contributors
//
// MOT evaluation: detection precision/recall plus the identity-level metrics
// (IDF1/IDP/IDR via optimal trajectory matching, identity switches, and
// fragmentations), computed from a ground-truth file and a tracker output
// file in the same 10-column CSV layout.

#pragma once

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <divetrack/assignment.hpp>
#include <divetrack/core.hpp>

namespace divetrack::metrics {

/// One-to-one per-frame correspondence between ground-truth and predicted
/// boxes: maximizes the number of pairs with IOU >= iou_min, then total IOU.
struct FrameMatch {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (gt index, pred index)
  std::size_t gt_count = 0;
  std::size_t pred_count = 0;
};

inline FrameMatch match_frame(const std::vector<IdBox>& gt, const std::vector<IdBox>& pred,
                              double iou_min = 0.5) {
  FrameMatch out;
  out.gt_count = gt.size();
  out.pred_count = pred.size();
  if (gt.empty() || pred.empty()) return out;
  CostMatrix costs(gt.size(), pred.size());
  for (std::size_t i = 0; i < gt.size(); ++i)
    for (std::size_t j = 0; j < pred.size(); ++j) {
      const double overlap = iou(gt[i].box, pred[j].box);
      if (overlap >= iou_min) costs.at(i, j) = 1.0 - overlap;
    }
  const MatchResult result = hungarian(costs);
  out.pairs = result.matches;
  std::sort(out.pairs.begin(), out.pairs.end());
  return out;
}

struct DetectionTallies {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
};

inline DetectionTallies detection_metrics(const GroundTruth& gt, const GroundTruth& pred,
                                          double iou_min = 0.5) {
  DetectionTallies tallies;
  std::set<int> frames;
  for (const auto& [frame, boxes] : gt) frames.insert(frame);
  for (const auto& [frame, boxes] : pred) frames.insert(frame);
  static const std::vector<IdBox> kEmpty;
  for (const int frame : frames) {
    const auto git = gt.find(frame);
    const auto pit = pred.find(frame);
    const auto& g = git == gt.end() ? kEmpty : git->second;
    const auto& p = pit == pred.end() ? kEmpty : pit->second;
    const FrameMatch match = match_frame(g, p, iou_min);
    tallies.tp += static_cast<std::int64_t>(match.pairs.size());
    tallies.fp += static_cast<std::int64_t>(match.pred_count - match.pairs.size());
    tallies.fn += static_cast<std::int64_t>(match.gt_count - match.pairs.size());
  }
  return tallies;
}

struct IdentityTallies {
  std::int64_t idtp = 0;
  std::int64_t idfp = 0;
  std::int64_t idfn = 0;
};

namespace detail {

// identity -> (frame -> box)
using Trajectories = std::map<int, std::map<int, BoundingBox>>;

inline Trajectories trajectories(const GroundTruth& data) {
  Trajectories out;
  for (const auto& [frame, boxes] : data)
    for (const IdBox& entry : boxes) out[entry.id][frame] = entry.box;
  return out;
}

}  // namespace detail

/// Trajectory-level identity metrics: ground-truth and predicted identities
/// are matched globally (with unmatched penalties) to minimize the total
/// number of disagreeing box-frames; a gt/pred pair agrees on a frame when
/// both are present and their boxes overlap at IOU >= iou_min.
inline IdentityTallies identity_metrics(const GroundTruth& gt, const GroundTruth& pred,
                                        double iou_min = 0.5) {
  const detail::Trajectories gt_traj = detail::trajectories(gt);
  const detail::Trajectories pred_traj = detail::trajectories(pred);
  std::vector<const std::map<int, BoundingBox>*> gts, preds;
  for (const auto& [id, frames] : gt_traj) gts.push_back(&frames);
  for (const auto& [id, frames] : pred_traj) preds.push_back(&frames);
  const std::size_t ng = gts.size();
  const std::size_t np = preds.size();

  std::int64_t gt_frames = 0;
  std::int64_t pred_frames = 0;
  for (const auto* t : gts) gt_frames += static_cast<std::int64_t>(t->size());
  for (const auto* t : preds) pred_frames += static_cast<std::int64_t>(t->size());

  const auto agree = [&](const std::map<int, BoundingBox>& a,
                         const std::map<int, BoundingBox>& b) {
    std::int64_t n = 0;
    for (const auto& [frame, box] : a) {
      const auto it = b.find(frame);
      if (it != b.end() && iou(box, it->second) >= iou_min) ++n;
    }
    return n;
  };

  // Square Ristani-style matrix: rows are gt identities then false-positive
  // dummies, cols are predicted identities then false-negative dummies.
  const std::size_t n = ng + np;
  IdentityTallies tallies;
  std::vector<std::vector<std::int64_t>> agreement(ng, std::vector<std::int64_t>(np, 0));
  if (n > 0) {
    CostMatrix costs(n, n);
    for (std::size_t i = 0; i < ng; ++i) {
      for (std::size_t j = 0; j < np; ++j) {
        agreement[i][j] = agree(*gts[i], *preds[j]);
        costs.at(i, j) = static_cast<double>(
            static_cast<std::int64_t>(gts[i]->size()) +
            static_cast<std::int64_t>(preds[j]->size()) - 2 * agreement[i][j]);
      }
      costs.at(i, np + i) = static_cast<double>(gts[i]->size());  // all missed
    }
    for (std::size_t k = 0; k < np; ++k) {
      costs.at(ng + k, k) = static_cast<double>(preds[k]->size());  // all false
      for (std::size_t j = np; j < n; ++j) costs.at(ng + k, j) = 0.0;
    }
    const MatchResult result = hungarian(costs);
    for (const auto& [r, c] : result.matches)
      if (r < ng && c < np) tallies.idtp += agreement[r][c];
  }
  tallies.idfp = pred_frames - tallies.idtp;
  tallies.idfn = gt_frames - tallies.idtp;
  return tallies;
}

struct EventTallies {
  std::int64_t switches = 0;   // matched gt identity changes predicted id
  std::int64_t fragments = 0;  // coverage resumes after a gap while present
};

/// Identity switches and fragmentations from the per-frame correspondence.
inline EventTallies event_metrics(const GroundTruth& gt, const GroundTruth& pred,
                                  double iou_min = 0.5) {
  // gt identity -> frame -> matched predicted id (absent key: unmatched)
  std::map<int, std::map<int, int>> matched;
  std::map<int, std::vector<int>> present;  // gt identity -> present frames
  static const std::vector<IdBox> kEmpty;
  std::set<int> frames;
  for (const auto& [frame, boxes] : gt) frames.insert(frame);
  for (const auto& [frame, boxes] : pred) frames.insert(frame);
  for (const int frame : frames) {
    const auto git = gt.find(frame);
    const auto pit = pred.find(frame);
    const auto& g = git == gt.end() ? kEmpty : git->second;
    const auto& p = pit == pred.end() ? kEmpty : pit->second;
    for (const IdBox& entry : g) present[entry.id].push_back(frame);
    const FrameMatch match = match_frame(g, p, iou_min);
    for (const auto& [gi, pj] : match.pairs) matched[g[gi].id][frame] = p[pj].id;
  }

  EventTallies tallies;
  for (const auto& [gt_id, frame_list] : present) {
    const auto mit = matched.find(gt_id);
    int last_pred = 0;
    bool have_match = false;
    bool gap_since_match = false;
    for (const int frame : frame_list) {  // ascending: std::set-fed per frame
      const auto fit = mit == matched.end() ? std::map<int, int>::const_iterator{}
                                            : mit->second.find(frame);
      const bool is_matched = mit != matched.end() && fit != mit->second.end();
      if (!is_matched) {
        if (have_match) gap_since_match = true;
        continue;
      }
      if (have_match && fit->second != last_pred) ++tallies.switches;
      if (have_match && gap_since_match) ++tallies.fragments;
      last_pred = fit->second;
      have_match = true;
      gap_since_match = false;
    }
  }
  return tallies;
}

struct MetricsReport {
  double dp = 0.0;
  double dr = 0.0;
  double idf1 = 0.0;
  double idp = 0.0;
  double idr = 0.0;
  std::int64_t ids = 0;
  std::int64_t fm = 0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t idtp = 0;
  std::int64_t idfp = 0;
  std::int64_t idfn = 0;
  double iou_min = 0.5;
};

/// Full report. Ratios with a zero denominator report 0, except in the
/// vacuous case (empty ground truth and empty output) where everything that
/// can be perfect is 1.
inline MetricsReport evaluate(const GroundTruth& gt, const GroundTruth& pred,
                              double iou_min = 0.5) {
  if (iou_min <= 0.0 || iou_min > 1.0)
    throw std::invalid_argument("evaluate: iou_min must lie in (0, 1]");
  MetricsReport report;
  report.iou_min = iou_min;
  const DetectionTallies det = detection_metrics(gt, pred, iou_min);
  const IdentityTallies ident = identity_metrics(gt, pred, iou_min);
  const EventTallies events = event_metrics(gt, pred, iou_min);
  report.tp = det.tp;
  report.fp = det.fp;
  report.fn = det.fn;
  report.idtp = ident.idtp;
  report.idfp = ident.idfp;
  report.idfn = ident.idfn;
  report.ids = events.switches;
  report.fm = events.fragments;

  const bool vacuous = det.tp + det.fp + det.fn == 0;
  const auto ratio = [vacuous](std::int64_t num, std::int64_t denom) {
    if (denom == 0) return vacuous ? 1.0 : 0.0;
    return static_cast<double>(num) / static_cast<double>(denom);
  };
  report.dp = ratio(det.tp, det.tp + det.fp);
  report.dr = ratio(det.tp, det.tp + det.fn);
  report.idp = ratio(ident.idtp, ident.idtp + ident.idfp);
  report.idr = ratio(ident.idtp, ident.idtp + ident.idfn);
  report.idf1 = ratio(2 * ident.idtp, 2 * ident.idtp + ident.idfp + ident.idfn);
  return report;
}

inline std::string format_table(const MetricsReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(6);
  const auto real = [&](const char* name, double value) {
    out << std::left << std::setw(6) << name << std::right << std::setw(12) << value << "\n";
  };
  const auto count = [&](const char* name, std::int64_t value) {
    out << std::left << std::setw(6) << name << std::right << std::setw(12) << value << "\n";
  };
  real("DP", report.dp);
  real("DR", report.dr);
  real("IDF1", report.idf1);
  real("IDP", report.idp);
  real("IDR", report.idr);
  count("IDS", report.ids);
  count("FM", report.fm);
  count("TP", report.tp);
  count("FP", report.fp);
  count("FN", report.fn);
  count("IDTP", report.idtp);
  count("IDFP", report.idfp);
  count("IDFN", report.idfn);
  return out.str();
}

inline std::string format_key_values(const MetricsReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(6);
  out << "DP=" << report.dp << "\n";
  out << "DR=" << report.dr << "\n";
  out << "IDF1=" << report.idf1 << "\n";
  out << "IDP=" << report.idp << "\n";
  out << "IDR=" << report.idr << "\n";
  out << "IDS=" << report.ids << "\n";
  out << "FM=" << report.fm << "\n";
  out << "TP=" << report.tp << "\n";
  out << "FP=" << report.fp << "\n";
  out << "FN=" << report.fn << "\n";
  out << "IDTP=" << report.idtp << "\n";
  out << "IDFP=" << report.idfp << "\n";
  out << "IDFN=" << report.idfn << "\n";
  return out.str();
}

}  // namespace divetrack::metrics
