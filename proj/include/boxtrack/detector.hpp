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
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "boxtrack/box.hpp"
#include "boxtrack/camera.hpp"
#include "boxtrack/common.hpp"
#include "boxtrack/rng.hpp"

namespace boxtrack {

/// Center-likelihood grid over the viewport. Cell (ix, iy) covers the pixel
/// square starting at (ix * stride, iy * stride); values are stored
/// row-major and live in [0, 1].
struct Heatmap {
  int width = 0;   // cells
  int height = 0;  // cells
  double stride = 16.0;  // pixels per cell
  std::vector<double> values;

  double at(int ix, int iy) const { return values[iy * width + ix]; }
  Vec2 cell_center(int ix, int iy) const {
    return {(ix + 0.5) * stride, (iy + 0.5) * stride};
  }
};

/// Per-cell regression target: pixel offsets from the cell center to the
/// eight corner keypoints, ordered by keypoint index.
struct VertexField {
  int width = 0;
  int height = 0;
  double stride = 16.0;
  std::vector<std::array<double, 16>> offsets;

  const std::array<double, 16>& at(int ix, int iy) const {
    return offsets[iy * width + ix];
  }
};

struct Detection {
  KeypointSet2D keypoints;
  double score = 1.0;
  int frame_id = 0;  // capture frame

  bool is_valid() const {
    return score >= 0.0 && score <= 1.0 && frame_id >= 0;
  }
};

/// Synthetic detector behavior: emission cadence, delivery latency in
/// frames, per-keypoint pixel noise, and dropout probability.
struct StubConfig {
  double noise_sigma = 0.0;
  int cadence = 1;
  int latency = 0;
  double dropout = 0.0;
  std::uint64_t seed = 0;

  bool is_valid() const {
    return cadence >= 1 && latency >= 0 && dropout >= 0.0 && dropout < 1.0 &&
           noise_sigma >= 0.0;
  }
};

/// Renders the detection target: a Gaussian centered at the projected box
/// centroid whose standard deviations are beta times the axis-aligned
/// extent of the nine projected keypoints. Throws DomainError when the
/// centroid projects outside the viewport.
inline Heatmap render_gt_heatmap(const CameraIntrinsics& k,
                                 const BoxPose& pose, double beta,
                                 int grid_width, int grid_height) {
  if (!(beta > 0.0) || grid_width <= 0 || grid_height <= 0) {
    throw DomainError("render_gt_heatmap: invalid beta or grid");
  }
  const KeypointSet2D kp = project_box(k, pose);
  const Vec2 center = kp.points[0];
  if (!k.contains(center)) {
    throw DomainError("render_gt_heatmap: centroid outside viewport");
  }
  const Rect extent = keypoint_extent(kp);
  const double sigma_u = beta * extent.width();
  const double sigma_v = beta * extent.height();
  if (!(sigma_u > 0.0) || !(sigma_v > 0.0)) {
    throw DomainError("render_gt_heatmap: degenerate projected extent");
  }

  Heatmap h;
  h.width = grid_width;
  h.height = grid_height;
  h.stride = static_cast<double>(k.width) / grid_width;
  h.values.resize(static_cast<std::size_t>(grid_width) * grid_height);
  for (int iy = 0; iy < grid_height; ++iy) {
    for (int ix = 0; ix < grid_width; ++ix) {
      const Vec2 c = h.cell_center(ix, iy);
      const double du = (c.x() - center.x()) / sigma_u;
      const double dv = (c.y() - center.y()) / sigma_v;
      h.values[iy * grid_width + ix] = std::exp(-0.5 * (du * du + dv * dv));
    }
  }
  return h;
}

/// Regression target paired with render_gt_heatmap: every cell stores the
/// true offsets from its center to the eight projected corners.
inline VertexField render_gt_vertex_field(const CameraIntrinsics& k,
                                          const BoxPose& pose, int grid_width,
                                          int grid_height) {
  const KeypointSet2D kp = project_box(k, pose);
  VertexField f;
  f.width = grid_width;
  f.height = grid_height;
  f.stride = static_cast<double>(k.width) / grid_width;
  f.offsets.resize(static_cast<std::size_t>(grid_width) * grid_height);
  for (int iy = 0; iy < grid_height; ++iy) {
    for (int ix = 0; ix < grid_width; ++ix) {
      const Vec2 c = Vec2((ix + 0.5) * f.stride, (iy + 0.5) * f.stride);
      auto& cell = f.offsets[iy * grid_width + ix];
      for (int v = 1; v < kNumKeypoints; ++v) {
        cell[2 * (v - 1)] = kp.points[v].x() - c.x();
        cell[2 * (v - 1) + 1] = kp.points[v].y() - c.y();
      }
    }
  }
  return f;
}

/// Reads detections out of a heatmap + vertex field pair.
///
/// Peak candidates are cells at or above peak_threshold that dominate their
/// 8-neighborhood; candidates are visited by descending value (ties by
/// row-major index) and suppressed within nms_radius cells of an accepted
/// peak. Keypoint 0 is the peak cell center, keypoints 1..8 add the cell's
/// field offsets; the score is the peak value. Returns an empty list when
/// nothing clears the threshold.
inline std::vector<Detection> decode(const Heatmap& h, const VertexField& f,
                                     double peak_threshold,
                                     double nms_radius) {
  if (h.width != f.width || h.height != f.height) {
    throw ConfigError("decode: heatmap and vertex field grids differ");
  }
  struct Candidate {
    double value;
    int index;
  };
  std::vector<Candidate> candidates;
  for (int iy = 0; iy < h.height; ++iy) {
    for (int ix = 0; ix < h.width; ++ix) {
      const double v = h.at(ix, iy);
      if (v < peak_threshold) continue;
      bool is_peak = true;
      for (int dy = -1; dy <= 1 && is_peak; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = ix + dx, ny = iy + dy;
          if (nx < 0 || ny < 0 || nx >= h.width || ny >= h.height) continue;
          if (h.at(nx, ny) > v) {
            is_peak = false;
            break;
          }
        }
      }
      if (is_peak) candidates.push_back({v, iy * h.width + ix});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.value != b.value) return a.value > b.value;
              return a.index < b.index;
            });

  std::vector<Detection> detections;
  std::vector<Vec2> kept_cells;
  for (const Candidate& cand : candidates) {
    const int ix = cand.index % h.width;
    const int iy = cand.index / h.width;
    const Vec2 cell(ix, iy);
    bool suppressed = false;
    for (const Vec2& kept : kept_cells) {
      if ((cell - kept).norm() <= nms_radius) {
        suppressed = true;
        break;
      }
    }
    if (suppressed) continue;
    kept_cells.push_back(cell);

    Detection d;
    d.score = cand.value;
    d.keypoints.points[0] = h.cell_center(ix, iy);
    const auto& offs = f.at(ix, iy);
    for (int v = 1; v < kNumKeypoints; ++v) {
      d.keypoints.points[v] =
          d.keypoints.points[0] + Vec2(offs[2 * (v - 1)], offs[2 * (v - 1) + 1]);
    }
    detections.push_back(d);
  }
  return detections;
}

/// Synthetic stand-in for the detection network: on schedule frames it
/// emits the ground-truth projections of each object, perturbed by seeded
/// Gaussian noise.
///
/// Per object, the draw stream is Rng(mix_seed(seed, frame_id, object)):
/// one uniform for dropout, then 18 normals (u then v per keypoint, index
/// order), taken whether or not noise_sigma is zero so the stream layout
/// never shifts. The score is 1 / (1 + rms of the drawn noise); detections
/// are stamped with the capture frame and reach the pipeline latency
/// frames later.
inline std::vector<Detection> stub_detect(const CameraIntrinsics& k,
                                          std::span<const BoxPose> gt_poses,
                                          int frame_id,
                                          const StubConfig& cfg) {
  std::vector<Detection> out;
  if (frame_id % cfg.cadence != 0) return out;
  for (std::size_t obj = 0; obj < gt_poses.size(); ++obj) {
    Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(frame_id),
                     static_cast<std::uint64_t>(obj)));
    const double dropout_draw = rng.uniform();
    KeypointSet2D kp;
    try {
      kp = project_box(k, gt_poses[obj]);
    } catch (const DomainError&) {
      continue;  // object not visible this frame
    }
    double noise_sq = 0.0;
    for (auto& p : kp.points) {
      const Vec2 noise(cfg.noise_sigma * rng.normal(),
                       cfg.noise_sigma * rng.normal());
      noise_sq += noise.squaredNorm();
      p += noise;
    }
    if (dropout_draw < cfg.dropout) continue;

    Detection d;
    d.keypoints = kp;
    d.frame_id = frame_id;
    d.score = 1.0 / (1.0 + std::sqrt(noise_sq / kNumKeypoints));
    out.push_back(d);
  }
  return out;
}

}  // namespace boxtrack
