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
#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "boxtrack/box.hpp"
#include "boxtrack/camera.hpp"
#include "boxtrack/common.hpp"
#include "boxtrack/epnp.hpp"
#include "boxtrack/homography.hpp"
#include "boxtrack/iou.hpp"
#include "boxtrack/sim.hpp"

namespace boxtrack {

struct PipelineConfig {
  double consolidation_iou = 0.5;  // 2D rectangle IoU gate for matching
  int max_missed = 3;              // detector runs a track may miss
  double region_margin = 0.25;     // correspondence gate, fraction of extent
  double blend_weight = 1.0;       // detection weight at consolidation
  RansacConfig ransac;

  void validate() const {
    if (!(consolidation_iou > 0.0 && consolidation_iou < 1.0)) {
      throw ConfigError("pipeline.consolidation_iou must be in (0, 1)");
    }
    if (!(blend_weight >= 0.0 && blend_weight <= 1.0)) {
      throw ConfigError("pipeline.blend_weight must be in [0, 1]");
    }
    if (max_missed < 0) throw ConfigError("pipeline.max_missed must be >= 0");
    if (!(region_margin >= 0.0)) {
      throw ConfigError("pipeline.region_margin must be >= 0");
    }
    if (!(ransac.inlier_threshold > 0.0) || ransac.max_iterations < 1 ||
        ransac.min_inliers < 4) {
      throw ConfigError("pipeline.ransac invalid");
    }
  }
};

struct TrackState {
  int id = -1;
  bool alive = true;
  KeypointSet2D keypoints;   // current frame, pixels
  BoxPose pose;              // canonical scale
  Vec3 canonical_size = Vec3::Ones();  // fixed at init, max component 1
  Homography chain;          // composition since the last accepted detection
  // Per-frame homographies behind `chain`, oldest first, so a stale
  // detection can be forwarded from its capture frame only.
  std::vector<std::pair<int, Homography>> chain_segments;
  int last_detection_frame = 0;
  int missed_detections = 0;
  double last_residual = 0.0;
};

/// Starts a track from a detection: EPnP lift, scaled so the largest
/// recovered size component is 1, which freezes the track's scale gauge.
/// Throws AmbiguousLiftError when the detection cannot be lifted.
inline TrackState init_track(const Detection& d, const CameraIntrinsics& k,
                             int id) {
  const LiftResult lr = lift(k, d.keypoints);
  const Vec3 raw_size = recovered_size(lr.vertices);
  const double scale = 1.0 / raw_size.maxCoeff();

  OrientedBoxVertices verts;
  for (int i = 0; i < kNumKeypoints; ++i) {
    verts.points[i] = scale * lr.vertices.points[i];
  }

  TrackState s;
  s.id = id;
  s.keypoints = d.keypoints;
  s.canonical_size = scale * raw_size;
  s.pose = fit_pose_from_vertices(verts).pose;
  s.chain = Homography::identity();
  s.last_detection_frame = d.frame_id;
  s.last_residual = lr.reprojection_rms;
  return s;
}

namespace detail {

inline Rect expand_rect(const Rect& r, double margin) {
  Rect out = r;
  const Vec2 pad(margin * r.width(), margin * r.height());
  out.min -= pad;
  out.max += pad;
  return out;
}

}  // namespace detail

/// Advances one track by one frame: gates correspondences to the region
/// around the track, estimates the frame homography, moves the keypoints,
/// and re-lifts them at the canonical scale. Any failure (RANSAC support,
/// lift degeneracy, invalid depth) returns the state marked dead.
inline TrackState track_step(const TrackState& s,
                             std::span<const Correspondence> corrs,
                             const CameraIntrinsics& k,
                             const PipelineConfig& cfg, int frame_id) {
  TrackState next = s;
  try {
    const Rect gate =
        detail::expand_rect(keypoint_extent(s.keypoints), cfg.region_margin);
    std::vector<Correspondence> gated;
    gated.reserve(corrs.size());
    for (const Correspondence& c : corrs) {
      if (c.prev.x() >= gate.min.x() && c.prev.x() <= gate.max.x() &&
          c.prev.y() >= gate.min.y() && c.prev.y() <= gate.max.y()) {
        gated.push_back(c);
      }
    }

    const RansacResult ransac = estimate_ransac(gated, cfg.ransac);
    for (int i = 0; i < kNumKeypoints; ++i) {
      next.keypoints.points[i] = apply(ransac.h, s.keypoints.points[i]);
    }

    const LiftResult lr = lift(k, next.keypoints);
    const OrientedBoxVertices verts =
        rescale_to_canonical(lr.vertices, s.canonical_size);
    next.pose = fit_pose_from_vertices(verts).pose;
    next.last_residual = lr.reprojection_rms;
    next.chain = compose(ransac.h, s.chain);
    next.chain_segments.push_back({frame_id, ransac.h});
  } catch (const TrackingLostError& e) {
    log_message(LogLevel::kInfo,
                "track " + std::to_string(s.id) + " lost: " + e.what());
    next.alive = false;
  } catch (const EstimationError& e) {
    log_message(LogLevel::kInfo,
                "track " + std::to_string(s.id) + " lost: " + e.what());
    next.alive = false;
  } catch (const DomainError& e) {
    log_message(LogLevel::kInfo,
                "track " + std::to_string(s.id) + " lost: " + e.what());
    next.alive = false;
  }
  return next;
}

enum class ConsolidationOutcome {
  kMatched,
  kInitialized,
  kDiscardedStale,
  kRejected,  // lift failure on a fresh or blended detection
};

/// Merges one delivered detection into the track set.
///
/// Every live track forwards the detection from its capture frame to the
/// current frame through its own homography chain (tracks whose chain
/// starts after the capture frame cannot forward and are skipped, as are
/// tracks named in exclude_ids -- callers pass the tracks already matched
/// by earlier detections of the same delivery batch). The track with the
/// highest 2D extent IoU at or above cfg.consolidation_iou wins: its
/// keypoints become blend_weight * forwarded + (1 - blend_weight) *
/// tracked, re-lifted at the track's canonical size, and its chain
/// restarts here. An unmatched detection starts a new track from
/// init_keypoints (callers that can forward the detection through
/// scene-level motion pass the forwarded points; nullptr uses the raw
/// detection) -- unless it overlaps a live track it was not allowed to
/// update, in which case it is discarded as a stale duplicate.
inline ConsolidationOutcome consolidate(
    std::vector<TrackState>* tracks, const Detection& d, int current_frame,
    const CameraIntrinsics& k, const PipelineConfig& cfg, int* next_id,
    const KeypointSet2D* init_keypoints = nullptr,
    int* matched_track_id = nullptr,
    const std::vector<int>* exclude_ids = nullptr) {
  const auto excluded = [&](int id) {
    return exclude_ids != nullptr &&
           std::find(exclude_ids->begin(), exclude_ids->end(), id) !=
               exclude_ids->end();
  };

  int best_index = -1;
  double best_iou = 0.0;
  KeypointSet2D best_forwarded;

  for (std::size_t ti = 0; ti < tracks->size(); ++ti) {
    const TrackState& track = (*tracks)[ti];
    if (!track.alive || excluded(track.id)) continue;
    if (d.frame_id < track.last_detection_frame) continue;  // chain too short

    KeypointSet2D forwarded = d.keypoints;
    bool forward_ok = true;
    for (const auto& [frame, h] : track.chain_segments) {
      if (frame <= d.frame_id) continue;
      try {
        for (auto& p : forwarded.points) p = apply(h, p);
      } catch (const DomainError&) {
        forward_ok = false;
        break;
      }
    }
    if (!forward_ok) continue;

    const double overlap = iou2d_rect(keypoint_extent(forwarded),
                                      keypoint_extent(track.keypoints));
    if (overlap > best_iou) {
      best_iou = overlap;
      best_index = static_cast<int>(ti);
      best_forwarded = forwarded;
    }
  }

  if (best_index >= 0 && best_iou >= cfg.consolidation_iou) {
    TrackState& track = (*tracks)[best_index];
    KeypointSet2D blended;
    for (int i = 0; i < kNumKeypoints; ++i) {
      blended.points[i] = cfg.blend_weight * best_forwarded.points[i] +
                          (1.0 - cfg.blend_weight) * track.keypoints.points[i];
    }
    try {
      const LiftResult lr = lift(k, blended);
      const OrientedBoxVertices verts =
          rescale_to_canonical(lr.vertices, track.canonical_size);
      track.pose = fit_pose_from_vertices(verts).pose;
      track.keypoints = blended;
      track.last_residual = lr.reprojection_rms;
    } catch (const EstimationError& e) {
      log_message(LogLevel::kWarn,
                  "consolidate: detection unusable for track " +
                      std::to_string(track.id) + ": " + e.what());
      if (matched_track_id != nullptr) *matched_track_id = track.id;
      return ConsolidationOutcome::kRejected;
    }
    track.chain = Homography::identity();
    track.chain_segments.clear();
    track.last_detection_frame = current_frame;
    track.missed_detections = 0;
    if (matched_track_id != nullptr) *matched_track_id = track.id;
    return ConsolidationOutcome::kMatched;
  }

  // No legal match. A detection that still lands on top of a live track is
  // an older view of an object that already consolidated; starting a second
  // track there would fork the identity.
  const KeypointSet2D& seed_keypoints =
      init_keypoints != nullptr ? *init_keypoints : d.keypoints;
  const Rect seed_extent = keypoint_extent(seed_keypoints);
  for (const TrackState& track : *tracks) {
    if (!track.alive) continue;
    if (iou2d_rect(seed_extent, keypoint_extent(track.keypoints)) >=
        cfg.consolidation_iou) {
      log_message(LogLevel::kWarn,
                  "consolidate: detection captured at frame " +
                      std::to_string(d.frame_id) +
                      " is a stale duplicate of track " +
                      std::to_string(track.id) + ", discarded");
      return ConsolidationOutcome::kDiscardedStale;
    }
  }

  Detection seed = d;
  seed.keypoints = seed_keypoints;
  try {
    TrackState fresh = init_track(seed, k, (*next_id)++);
    fresh.last_detection_frame = current_frame;
    tracks->push_back(std::move(fresh));
    if (matched_track_id != nullptr) *matched_track_id = tracks->back().id;
    return ConsolidationOutcome::kInitialized;
  } catch (const EstimationError& e) {
    log_message(LogLevel::kWarn,
                std::string("consolidate: detection rejected at init: ") +
                    e.what());
    return ConsolidationOutcome::kRejected;
  }
}

struct PoseRecord {
  int frame = 0;
  int id = 0;
  KeypointSet2D keypoints;
  BoxPose pose;
  double residual = 0.0;
};

struct TrackEvent {
  int frame = 0;
  int id = 0;
  std::string type;  // "init" | "lost" | "dropped"
};

struct PipelineResult {
  std::vector<PoseRecord> records;
  std::vector<TrackEvent> events;
};

/// Single-writer detection-plus-tracking state machine. Each frame: step
/// all live tracks through the frame's correspondences, then deliver the
/// frame's detections (already ordered by capture frame) through
/// consolidation, then report every live track.
///
/// Fresh tracks born from late detections are forwarded to the current
/// frame through per-frame scene homographies estimated from the full
/// correspondence sets that arrived since the capture frame.
class Pipeline {
 public:
  Pipeline(const CameraIntrinsics& k, const PipelineConfig& cfg)
      : intrinsics_(k), cfg_(cfg) {
    cfg_.validate();
  }

  std::vector<PoseRecord> step(const SceneFrame& frame) {
    const int t = frame.frame_id;

    for (TrackState& track : tracks_) {
      track = track_step(track, frame.correspondences, intrinsics_, cfg_, t);
      if (!track.alive) events_.push_back({t, track.id, "lost"});
    }
    std::erase_if(tracks_, [](const TrackState& s) { return !s.alive; });

    recent_frames_.push_back({t, frame.correspondences, std::nullopt});
    if (recent_frames_.size() > kMaxBufferedFrames) {
      recent_frames_.pop_front();
    }

    if (!frame.detections.empty()) {
      std::vector<int> touched;
      for (const Detection& d : frame.detections) {
        std::optional<KeypointSet2D> forwarded = forward_through_scene(d, t);
        int matched_id = -1;
        const ConsolidationOutcome outcome = consolidate(
            &tracks_, d, t, intrinsics_, cfg_, &next_id_,
            forwarded.has_value() ? &*forwarded : nullptr, &matched_id,
            &touched);
        if (outcome == ConsolidationOutcome::kInitialized) {
          events_.push_back({t, matched_id, "init"});
        }
        if (matched_id >= 0) touched.push_back(matched_id);
        max_delivered_capture_ = std::max(max_delivered_capture_, d.frame_id);
      }
      for (TrackState& track : tracks_) {
        if (std::find(touched.begin(), touched.end(), track.id) ==
            touched.end()) {
          ++track.missed_detections;
        }
      }
      for (const TrackState& track : tracks_) {
        if (track.missed_detections > cfg_.max_missed) {
          events_.push_back({t, track.id, "dropped"});
        }
      }
      std::erase_if(tracks_, [this](const TrackState& s) {
        return s.missed_detections > cfg_.max_missed;
      });
      while (!recent_frames_.empty() &&
             recent_frames_.front().frame_id <= max_delivered_capture_) {
        recent_frames_.pop_front();
      }
    }

    std::vector<PoseRecord> out;
    out.reserve(tracks_.size());
    for (const TrackState& track : tracks_) {
      out.push_back(
          {t, track.id, track.keypoints, track.pose, track.last_residual});
    }
    return out;
  }

  const std::vector<TrackEvent>& events() const { return events_; }
  const std::vector<TrackState>& tracks() const { return tracks_; }

 private:
  struct BufferedFrame {
    int frame_id;
    std::vector<Correspondence> correspondences;
    std::optional<Homography> homography;  // lazily estimated
  };

  static constexpr std::size_t kMaxBufferedFrames = 64;

  // Forwards a detection from its capture frame to the current frame using
  // whole-frame homographies (one RANSAC per buffered frame, cached).
  // Returns nullopt when the needed frames left the buffer or a homography
  // cannot be estimated; the caller then falls back to the raw keypoints.
  std::optional<KeypointSet2D> forward_through_scene(const Detection& d,
                                                     int current_frame) {
    if (d.frame_id >= current_frame) return std::nullopt;
    KeypointSet2D kp = d.keypoints;
    for (BufferedFrame& bf : recent_frames_) {
      if (bf.frame_id <= d.frame_id || bf.frame_id > current_frame) continue;
      if (!bf.homography.has_value()) {
        try {
          bf.homography =
              estimate_ransac(bf.correspondences, cfg_.ransac).h;
        } catch (const TrackingLostError& e) {
          log_message(LogLevel::kWarn,
                      "scene homography unavailable at frame " +
                          std::to_string(bf.frame_id) + ": " + e.what());
          return std::nullopt;
        }
      }
      try {
        for (auto& p : kp.points) p = apply(*bf.homography, p);
      } catch (const DomainError&) {
        return std::nullopt;
      }
    }
    return kp;
  }

  CameraIntrinsics intrinsics_;
  PipelineConfig cfg_;
  std::vector<TrackState> tracks_;
  std::vector<TrackEvent> events_;
  std::deque<BufferedFrame> recent_frames_;
  int next_id_ = 0;
  int max_delivered_capture_ = -1;
};

/// Runs the full pipeline over a scene. Output is a pure function of
/// (scene, cfg): every random draw is seeded and every per-frame loop is
/// ordered, so two runs are bitwise identical.
inline PipelineResult run_pipeline(const Scene& scene,
                                   const PipelineConfig& cfg) {
  Pipeline pipeline(scene.intrinsics, cfg);
  PipelineResult result;
  for (const SceneFrame& frame : scene.frames) {
    std::vector<PoseRecord> records = pipeline.step(frame);
    result.records.insert(result.records.end(), records.begin(),
                          records.end());
  }
  result.events = pipeline.events();
  return result;
}

}  // namespace boxtrack
