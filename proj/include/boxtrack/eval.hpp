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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "boxtrack/box.hpp"
#include "boxtrack/common.hpp"
#include "boxtrack/epnp.hpp"
#include "boxtrack/iou.hpp"

namespace boxtrack {

/// Scale-aware decomposition of the difference between an estimated and a
/// true pose. The pipeline's output is defined up to one global scale, so
/// the depth ratio carries the gauge and the size ratio is measured after
/// depth alignment.
struct PoseError {
  double rotation_err = 0.0;         // geodesic, radians
  double translation_dir_err = 0.0;  // radians between translation rays
  double depth_ratio = 1.0;          // estimated / true center depth
  double size_ratio = 1.0;           // gm(size) ratio after depth alignment
};

inline PoseError pose_error(const BoxPose& est, const BoxPose& gt) {
  PoseError e;
  const double trace_cos =
      ((est.rotation.transpose() * gt.rotation).trace() - 1.0) / 2.0;
  e.rotation_err = std::acos(std::clamp(trace_cos, -1.0, 1.0));

  const double dir_cos = est.translation.normalized().dot(
      gt.translation.normalized());
  e.translation_dir_err = std::acos(std::clamp(dir_cos, -1.0, 1.0));

  e.depth_ratio = est.translation.z() / gt.translation.z();
  e.size_ratio = geometric_mean_size(est.size) /
                 (geometric_mean_size(gt.size) * e.depth_ratio);
  return e;
}

/// A scored pose estimate entering the AP sweep.
struct ScoredEstimate {
  BoxPose pose;
  double score = 0.0;
  int frame_id = 0;
};

struct GroundTruthBox {
  BoxPose pose;
  int frame_id = 0;
};

struct PRPoint {
  double recall = 0.0;
  double precision = 0.0;
  double score_threshold = 0.0;
};

struct APResult {
  double ap = 0.0;
  std::vector<PRPoint> curve;  // one point per detection in score order
};

/// Scales an estimate about the camera origin so its center depth matches
/// the ground truth, resolving the free gauge before volumetric overlap.
inline BoxPose align_scale_to_depth(const BoxPose& est, const BoxPose& gt) {
  const double lambda = gt.translation.z() / est.translation.z();
  BoxPose aligned = est;
  aligned.translation *= lambda;
  aligned.size *= lambda;
  return aligned;
}

/// All-point interpolated average precision at a 3D IoU threshold.
///
/// Estimates are sorted by score (ties keep input order) and greedily
/// matched within their frame to the unmatched ground-truth box of highest
/// IoU, counting a true positive when that IoU reaches iou_thresh. Each
/// estimate is depth-aligned to its ground-truth candidate before the
/// overlap test. The score is the area under the precision envelope over
/// recall. Throws MetricError when the ground-truth set is empty.
inline APResult average_precision(std::span<const ScoredEstimate> estimates,
                                  std::span<const GroundTruthBox> gts,
                                  double iou_thresh) {
  if (gts.empty()) {
    throw MetricError("average_precision: empty ground-truth set");
  }

  std::vector<std::size_t> order(estimates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return estimates[a].score > estimates[b].score;
                   });

  std::vector<bool> gt_used(gts.size(), false);
  std::vector<bool> is_tp;
  is_tp.reserve(order.size());
  for (const std::size_t idx : order) {
    const ScoredEstimate& est = estimates[idx];
    double best_iou = 0.0;
    int best_gt = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gt_used[g] || gts[g].frame_id != est.frame_id) continue;
      const double overlap =
          iou3d(align_scale_to_depth(est.pose, gts[g].pose), gts[g].pose);
      if (overlap > best_iou) {
        best_iou = overlap;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt >= 0 && best_iou >= iou_thresh) {
      gt_used[best_gt] = true;
      is_tp.push_back(true);
    } else {
      is_tp.push_back(false);
    }
  }

  APResult result;
  const double n_gt = static_cast<double>(gts.size());
  int tp = 0;
  std::vector<double> precisions(order.size()), recalls(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    tp += is_tp[i] ? 1 : 0;
    precisions[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recalls[i] = static_cast<double>(tp) / n_gt;
    result.curve.push_back(
        {recalls[i], precisions[i], estimates[order[i]].score});
  }

  // Precision envelope: running max from the right, integrated over the
  // recall steps (all-point interpolation).
  double envelope = 0.0;
  double ap = 0.0;
  for (std::size_t i = order.size(); i-- > 0;) {
    envelope = std::max(envelope, precisions[i]);
    const double recall_below = (i == 0) ? 0.0 : recalls[i - 1];
    if (recalls[i] > recall_below) {
      ap += envelope * (recalls[i] - recall_below);
    }
  }
  result.ap = ap;
  return result;
}

/// One aligned sample for the jitter metric: the estimated and true
/// keypoints of the same track and frame.
struct JitterSample {
  int frame_id = 0;
  KeypointSet2D estimate;
  KeypointSet2D truth;
};

/// Temporal jitter: the mean over consecutive-frame pairs of the mean
/// keypoint displacement error |(est_t - est_{t-1}) - (gt_t - gt_{t-1})|.
/// Samples must be ordered by frame; only adjacent frame ids form pairs.
/// Throws MetricError with fewer than two consecutive samples.
inline double jitter(std::span<const JitterSample> samples) {
  double sum = 0.0;
  int pairs = 0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].frame_id != samples[i - 1].frame_id + 1) continue;
    double frame_mean = 0.0;
    for (int p = 0; p < kNumKeypoints; ++p) {
      const Vec2 est_delta =
          samples[i].estimate.points[p] - samples[i - 1].estimate.points[p];
      const Vec2 gt_delta =
          samples[i].truth.points[p] - samples[i - 1].truth.points[p];
      frame_mean += (est_delta - gt_delta).norm();
    }
    sum += frame_mean / kNumKeypoints;
    ++pairs;
  }
  if (pairs == 0) {
    throw MetricError("jitter: fewer than two consecutive frames");
  }
  return sum / pairs;
}

}  // namespace boxtrack
