// Copyright 2026 The boxtrack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "boxtrack/eval.hpp"
#include "boxtrack/io.hpp"
#include "boxtrack/sim.hpp"
#include "boxtrack/tracker.hpp"

namespace boxtrack {

struct TrackMetrics {
  int id = 0;
  int gt_object = -1;
  std::optional<double> jitter_px;
  std::vector<std::pair<int, PoseError>> pose_errors;  // (frame, error)
};

struct MetricsReport {
  std::vector<std::pair<double, double>> ap;  // (iou threshold, ap)
  std::vector<TrackMetrics> per_track;
  int n_frames_evaluated = 0;
  std::optional<double> mean_rotation_err;
  std::optional<double> mean_translation_dir_err;
  std::optional<double> mean_jitter_px;
};

/// Evaluates a pose stream against scene ground truth.
///
/// Tracks are assigned to the ground-truth object with the smallest mean
/// keypoint distance over their shared frames. AP treats every record as a
/// detection scored by 1 / (1 + residual) against all (frame, object)
/// ground-truth boxes. Throws MetricError when the record frames and the
/// scene frames are disjoint while records exist.
inline MetricsReport compute_metrics(const Scene& scene,
                                     const PipelineResult& result,
                                     std::span<const double> iou_thresholds) {
  MetricsReport report;
  const int n_frames = static_cast<int>(scene.frames.size());
  const int n_objects =
      scene.frames.empty() ? 0
                           : static_cast<int>(scene.frames[0].gt_poses.size());
  if (n_frames == 0 || n_objects == 0) {
    throw MetricError("compute_metrics: scene has no ground truth");
  }

  bool any_in_range = result.records.empty();
  for (const PoseRecord& r : result.records) {
    if (r.frame >= 0 && r.frame < n_frames) {
      any_in_range = true;
      break;
    }
  }
  if (!any_in_range) {
    throw MetricError("compute_metrics: record frames disjoint from scene");
  }

  // Ground-truth boxes for the AP sweep.
  std::vector<GroundTruthBox> gts;
  gts.reserve(static_cast<std::size_t>(n_frames) * n_objects);
  for (const SceneFrame& f : scene.frames) {
    for (const BoxPose& pose : f.gt_poses) {
      gts.push_back({pose, f.frame_id});
    }
  }
  std::vector<ScoredEstimate> estimates;
  estimates.reserve(result.records.size());
  for (const PoseRecord& r : result.records) {
    if (r.frame < 0 || r.frame >= n_frames) continue;
    estimates.push_back({r.pose, 1.0 / (1.0 + r.residual), r.frame});
  }
  for (const double thresh : iou_thresholds) {
    report.ap.push_back({thresh, average_precision(estimates, gts, thresh).ap});
  }

  // Group records by track id, keeping frame order.
  std::map<int, std::vector<const PoseRecord*>> by_track;
  for (const PoseRecord& r : result.records) {
    if (r.frame < 0 || r.frame >= n_frames) continue;
    by_track[r.id].push_back(&r);
  }

  double rot_sum = 0.0, dir_sum = 0.0, jitter_sum = 0.0;
  int err_count = 0, jitter_count = 0;
  std::set<int> frames_seen;
  for (const auto& [id, records] : by_track) {
    TrackMetrics tm;
    tm.id = id;

    // Assignment: smallest mean keypoint distance over the track's frames.
    double best_mean = 0.0;
    for (int obj = 0; obj < n_objects; ++obj) {
      double sum = 0.0;
      for (const PoseRecord* r : records) {
        const KeypointSet2D truth = project_box(
            scene.intrinsics, scene.frames[r->frame].gt_poses[obj]);
        for (int i = 0; i < kNumKeypoints; ++i) {
          sum += (r->keypoints.points[i] - truth.points[i]).norm();
        }
      }
      if (tm.gt_object < 0 || sum < best_mean) {
        best_mean = sum;
        tm.gt_object = obj;
      }
    }

    std::vector<JitterSample> samples;
    samples.reserve(records.size());
    for (const PoseRecord* r : records) {
      frames_seen.insert(r->frame);
      const BoxPose& gt = scene.frames[r->frame].gt_poses[tm.gt_object];
      const PoseError err = pose_error(r->pose, gt);
      tm.pose_errors.push_back({r->frame, err});
      rot_sum += err.rotation_err;
      dir_sum += err.translation_dir_err;
      ++err_count;

      JitterSample s;
      s.frame_id = r->frame;
      s.estimate = r->keypoints;
      s.truth = project_box(scene.intrinsics, gt);
      samples.push_back(std::move(s));
    }
    try {
      tm.jitter_px = jitter(samples);
      jitter_sum += *tm.jitter_px;
      ++jitter_count;
    } catch (const MetricError&) {
      tm.jitter_px = std::nullopt;
    }
    report.per_track.push_back(std::move(tm));
  }

  report.n_frames_evaluated = static_cast<int>(frames_seen.size());
  if (err_count > 0) {
    report.mean_rotation_err = rot_sum / err_count;
    report.mean_translation_dir_err = dir_sum / err_count;
  }
  if (jitter_count > 0) report.mean_jitter_px = jitter_sum / jitter_count;
  return report;
}

inline Json metrics_to_json(const MetricsReport& report) {
  Json ap = Json::array();
  for (const auto& [thresh, value] : report.ap) {
    ap.push_back(Json{{"iou_threshold", thresh}, {"ap", value}});
  }
  Json tracks = Json::array();
  for (const TrackMetrics& tm : report.per_track) {
    Json errors = Json::array();
    for (const auto& [frame, e] : tm.pose_errors) {
      errors.push_back(Json{{"frame", frame},
                            {"rotation_err", e.rotation_err},
                            {"translation_dir_err", e.translation_dir_err},
                            {"depth_ratio", e.depth_ratio},
                            {"size_ratio", e.size_ratio}});
    }
    tracks.push_back(
        Json{{"id", tm.id},
             {"gt_object", tm.gt_object},
             {"jitter", tm.jitter_px.has_value() ? Json(*tm.jitter_px)
                                                 : Json(nullptr)},
             {"pose_errors", errors}});
  }
  Json summary{
      {"n_tracks", static_cast<int>(report.per_track.size())},
      {"n_frames_evaluated", report.n_frames_evaluated},
      {"mean_rotation_err",
       report.mean_rotation_err ? Json(*report.mean_rotation_err)
                                : Json(nullptr)},
      {"mean_translation_dir_err",
       report.mean_translation_dir_err
           ? Json(*report.mean_translation_dir_err)
           : Json(nullptr)},
      {"mean_jitter",
       report.mean_jitter_px ? Json(*report.mean_jitter_px) : Json(nullptr)}};
  return Json{{"schema", kSchemaVersion},
              {"ap", ap},
              {"per_track", tracks},
              {"summary", summary}};
}

inline MetricsReport metrics_from_json(const Json& j) {
  io_detail::check_schema(j, "metrics");
  io_detail::require_keys(j, "metrics",
                          {"schema", "ap", "per_track", "summary"});
  MetricsReport report;
  for (const Json& aj : j.value("ap", Json::array())) {
    io_detail::require_keys(aj, "metrics.ap[]", {"iou_threshold", "ap"});
    report.ap.push_back({aj.at("iou_threshold").get<double>(),
                         aj.at("ap").get<double>()});
  }
  for (const Json& tj : j.value("per_track", Json::array())) {
    io_detail::require_keys(tj, "metrics.per_track[]",
                            {"id", "gt_object", "jitter", "pose_errors"});
    TrackMetrics tm;
    tm.id = io_detail::get_or(tj, "id", 0, "metrics.per_track[]");
    tm.gt_object =
        io_detail::get_or(tj, "gt_object", -1, "metrics.per_track[]");
    if (tj.contains("jitter") && !tj.at("jitter").is_null()) {
      tm.jitter_px = tj.at("jitter").get<double>();
    }
    for (const Json& ej : tj.value("pose_errors", Json::array())) {
      io_detail::require_keys(ej, "metrics.per_track[].pose_errors[]",
                              {"frame", "rotation_err", "translation_dir_err",
                               "depth_ratio", "size_ratio"});
      PoseError e;
      e.rotation_err = ej.at("rotation_err").get<double>();
      e.translation_dir_err = ej.at("translation_dir_err").get<double>();
      e.depth_ratio = ej.at("depth_ratio").get<double>();
      e.size_ratio = ej.at("size_ratio").get<double>();
      tm.pose_errors.push_back({ej.at("frame").get<int>(), e});
    }
    report.per_track.push_back(std::move(tm));
  }
  const Json& s = j.value("summary", Json::object());
  report.n_frames_evaluated =
      io_detail::get_or(s, "n_frames_evaluated", 0, "metrics.summary");
  if (s.contains("mean_rotation_err") && !s.at("mean_rotation_err").is_null()) {
    report.mean_rotation_err = s.at("mean_rotation_err").get<double>();
  }
  if (s.contains("mean_translation_dir_err") &&
      !s.at("mean_translation_dir_err").is_null()) {
    report.mean_translation_dir_err =
        s.at("mean_translation_dir_err").get<double>();
  }
  if (s.contains("mean_jitter") && !s.at("mean_jitter").is_null()) {
    report.mean_jitter_px = s.at("mean_jitter").get<double>();
  }
  return report;
}

}  // namespace boxtrack
