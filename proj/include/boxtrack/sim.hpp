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

#include <cmath>
#include <string>
#include <vector>

#include "boxtrack/box.hpp"
#include "boxtrack/camera.hpp"
#include "boxtrack/common.hpp"
#include "boxtrack/detector.hpp"
#include "boxtrack/homography.hpp"
#include "boxtrack/rng.hpp"

namespace boxtrack {

enum class CameraMotion { kOrbit, kTranslate, kHandheld, kPan };
enum class ObjectMotion { kStatic, kTranslate, kRoll };

/// Scene-generation parameters. The world is a z-up frame with the ground
/// plane at z = 0; objects rest on the plane around the origin and the
/// camera starts at (distance, 0, height) looking at the origin.
struct TrajectoryConfig {
  int n_frames = 2;
  int n_objects = 1;

  CameraMotion camera_motion = CameraMotion::kOrbit;
  double orbit_rate = 0.002;        // radians per frame about the world z axis
  Vec3 camera_velocity = Vec3::Zero();  // world units per frame (translate)
  double pan_rate = 0.0;            // radians per frame, camera rotating in place
  double jitter_position = 0.002;   // handheld positional noise, world units
  double jitter_target = 0.002;     // handheld look-target noise, world units

  ObjectMotion object_motion = ObjectMotion::kStatic;
  Vec3 object_velocity = Vec3::Zero();  // world units per frame, on the plane
  double roll_rate = 0.0;           // radians per frame about the world y axis

  int plane_points = 200;
  double corr_noise_sigma = 0.0;    // px, each correspondence endpoint
  double outlier_rate = 0.0;        // fraction replaced by uniform pixels

  double camera_distance = 2.5;     // world units from the origin
  double camera_height = 1.2;       // world units above the plane
  double object_spacing = 1.0;      // world units between object centers

  std::uint64_t seed = 0;

  // Throws ConfigError naming the first offending field.
  void validate() const {
    if (n_frames < 2) throw ConfigError("trajectory.n_frames must be >= 2");
    if (n_objects < 1) throw ConfigError("trajectory.n_objects must be >= 1");
    if (plane_points < 4) {
      throw ConfigError("trajectory.plane_points must be >= 4");
    }
    if (!(corr_noise_sigma >= 0.0)) {
      throw ConfigError("trajectory.corr_noise_sigma must be >= 0");
    }
    if (!(outlier_rate >= 0.0 && outlier_rate < 1.0)) {
      throw ConfigError("trajectory.outlier_rate must be in [0, 1)");
    }
    if (!(camera_height > 0.0)) {
      throw ConfigError("trajectory.camera_height must be > 0");
    }
    if (!std::isfinite(orbit_rate) || !std::isfinite(pan_rate) ||
        !std::isfinite(roll_rate) || !camera_velocity.allFinite() ||
        !object_velocity.allFinite()) {
      throw ConfigError("trajectory motion magnitudes must be finite");
    }
  }
};

/// World pose of the camera: r_cw maps world directions into the camera
/// frame (x right, y down, z forward), position is the optical center.
struct CameraPoseSample {
  Mat3 r_cw = Mat3::Identity();
  Vec3 position = Vec3::Zero();

  Vec3 world_to_camera(const Vec3& p_world) const {
    return r_cw * (p_world - position);
  }
};

struct SceneFrame {
  int frame_id = 0;
  CameraPoseSample camera;
  std::vector<BoxPose> gt_poses;                // camera frame, per object
  std::vector<Correspondence> correspondences;  // between frames t-1 and t
  std::vector<Detection> detections;            // delivered this frame
};

struct Scene {
  CameraIntrinsics intrinsics;
  TrajectoryConfig trajectory;
  StubConfig stub;  // filled in by schedule_detections
  std::vector<SceneFrame> frames;
};

namespace detail {

/// Camera looking from `position` toward `target`, world up = +z. Image v
/// grows downward, so camera y points world-down along the view.
inline Mat3 look_at(const Vec3& position, const Vec3& target) {
  const Vec3 forward = (target - position).normalized();
  Vec3 up = Vec3::UnitZ();
  if (std::abs(forward.dot(up)) > 0.999) up = Vec3::UnitY();
  const Vec3 right = forward.cross(up).normalized();
  const Vec3 down = forward.cross(right).normalized();
  Mat3 r_cw;
  r_cw.row(0) = right;
  r_cw.row(1) = down;
  r_cw.row(2) = forward;
  return r_cw;
}

struct WorldObject {
  Vec3 size = Vec3::Ones();
  Vec3 base_position = Vec3::Zero();  // center at t = 0
  Mat3 base_rotation = Mat3::Identity();
};

inline Vec3 object_position(const WorldObject& obj, const TrajectoryConfig& cfg,
                            int frame) {
  Vec3 p = obj.base_position;
  if (cfg.object_motion == ObjectMotion::kTranslate) {
    Vec3 v = cfg.object_velocity;
    v.z() = 0.0;  // stay on the plane
    p += static_cast<double>(frame) * v;
  }
  return p;
}

inline Mat3 object_rotation(const WorldObject& obj, const TrajectoryConfig& cfg,
                            int frame) {
  if (cfg.object_motion == ObjectMotion::kRoll) {
    return Eigen::AngleAxisd(cfg.roll_rate * frame, Vec3::UnitY())
               .toRotationMatrix() *
           obj.base_rotation;
  }
  return obj.base_rotation;
}

}  // namespace detail

/// Exact homography induced by the z = 0 world plane between two camera
/// poses, in pixel coordinates.
inline Homography plane_homography_between(const CameraIntrinsics& k,
                                           const CameraPoseSample& cam_a,
                                           const CameraPoseSample& cam_b) {
  const Mat3 r_ba = cam_b.r_cw * cam_a.r_cw.transpose();
  const Vec3 t_ba = cam_b.r_cw * (cam_a.position - cam_b.position);
  const Vec3 n_a = cam_a.r_cw * Vec3::UnitZ();  // plane normal, frame a
  const double d_a = -cam_a.position.z();       // n_a . X = d_a on the plane
  if (std::abs(d_a) < 1e-12) {
    throw DomainError("plane_homography: camera on the ground plane");
  }
  const Mat3 h_cam = r_ba + t_ba * n_a.transpose() / d_a;
  const Mat3 km = k.matrix();
  return Homography::from_matrix(km * h_cam * km.inverse());
}

/// Induced plane homography from frame_t - 1 to frame_t of a scene.
inline Homography plane_homography(const Scene& scene, int frame_t) {
  if (frame_t < 1 || frame_t >= static_cast<int>(scene.frames.size())) {
    throw DomainError("plane_homography: frame out of range");
  }
  return plane_homography_between(scene.intrinsics,
                                  scene.frames[frame_t - 1].camera,
                                  scene.frames[frame_t].camera);
}

/// Generates a deterministic synthetic scene.
///
/// All sampling comes from one Rng(cfg.seed) in a fixed order: (1) per
/// object, three size uniforms in [0.2, 0.35] and one yaw uniform in
/// [0, 2 pi); (2) per plane point, two uniforms (area-uniform annulus
/// around its object); (3) per frame, six normals of handheld jitter when
/// that mode is active; (4) per frame t >= 1 and per plane point, one
/// outlier uniform, then either two uniforms for the replacement pixel or
/// four normals for endpoint noise (prev u, v then curr u, v).
///
/// Throws ConfigError on invalid configs and DomainError when an object
/// center falls behind a camera.
inline Scene generate_scene(const TrajectoryConfig& cfg,
                            const CameraIntrinsics& intrinsics =
                                CameraIntrinsics{}) {
  cfg.validate();
  if (!intrinsics.is_valid()) {
    throw ConfigError("intrinsics invalid");
  }

  Scene scene;
  scene.intrinsics = intrinsics;
  scene.trajectory = cfg;
  Rng rng(cfg.seed);

  // Objects on the plane, spaced along world x around the origin.
  std::vector<detail::WorldObject> objects(cfg.n_objects);
  for (int i = 0; i < cfg.n_objects; ++i) {
    detail::WorldObject& obj = objects[i];
    obj.size = Vec3(rng.uniform(0.2, 0.35), rng.uniform(0.2, 0.35),
                    rng.uniform(0.2, 0.35));
    const double yaw = rng.uniform(0.0, 2.0 * std::numbers::pi);
    obj.base_rotation =
        Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
    const double offset =
        cfg.object_spacing * (i - 0.5 * (cfg.n_objects - 1));
    obj.base_position = Vec3(offset, 0.0, 0.5 * obj.size.z());
  }

  // Plane points in an annulus around each object's footprint.
  std::vector<Vec3> plane_points;
  plane_points.reserve(cfg.plane_points);
  for (int p = 0; p < cfg.plane_points; ++p) {
    const detail::WorldObject& obj = objects[p % cfg.n_objects];
    const double r_min = 0.05;
    const double r_max = 0.45 + 0.5 * cfg.object_spacing;
    const double u = rng.uniform();
    const double radius = std::sqrt(
        u * (r_max * r_max - r_min * r_min) + r_min * r_min);
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    plane_points.push_back(obj.base_position +
                           Vec3(radius * std::cos(angle),
                                radius * std::sin(angle), 0.0));
    plane_points.back().z() = 0.0;
  }

  // Camera path.
  std::vector<CameraPoseSample> cameras(cfg.n_frames);
  const Vec3 base_position(cfg.camera_distance, 0.0, cfg.camera_height);
  const Mat3 fixed_orientation = detail::look_at(base_position, Vec3::Zero());
  for (int t = 0; t < cfg.n_frames; ++t) {
    CameraPoseSample& cam = cameras[t];
    switch (cfg.camera_motion) {
      case CameraMotion::kOrbit: {
        const double theta = cfg.orbit_rate * t;
        cam.position = Vec3(cfg.camera_distance * std::cos(theta),
                            cfg.camera_distance * std::sin(theta),
                            cfg.camera_height);
        cam.r_cw = detail::look_at(cam.position, Vec3::Zero());
        break;
      }
      case CameraMotion::kTranslate: {
        cam.position = base_position + static_cast<double>(t) *
                                           cfg.camera_velocity;
        cam.r_cw = fixed_orientation;  // pure translation
        break;
      }
      case CameraMotion::kHandheld: {
        const Vec3 pos_jitter(rng.normal(), rng.normal(), rng.normal());
        const Vec3 tgt_jitter(rng.normal(), rng.normal(), rng.normal());
        cam.position = base_position +
                       static_cast<double>(t) * cfg.camera_velocity +
                       cfg.jitter_position * pos_jitter;
        cam.r_cw = detail::look_at(cam.position,
                                   cfg.jitter_target * tgt_jitter);
        break;
      }
      case CameraMotion::kPan: {
        cam.position = base_position;  // pure rotation about the center
        const double theta = cfg.pan_rate * t;
        const Vec3 target(0.3 * std::sin(theta), 0.3 * std::sin(0.7 * theta),
                          0.0);
        cam.r_cw = detail::look_at(cam.position, target);
        break;
      }
    }
  }

  // Frames: ground-truth camera-frame poses, then correspondences.
  scene.frames.resize(cfg.n_frames);
  for (int t = 0; t < cfg.n_frames; ++t) {
    SceneFrame& frame = scene.frames[t];
    frame.frame_id = t;
    frame.camera = cameras[t];
    frame.gt_poses.reserve(cfg.n_objects);
    for (const detail::WorldObject& obj : objects) {
      BoxPose pose;
      pose.rotation =
          cameras[t].r_cw * detail::object_rotation(obj, cfg, t);
      pose.translation = cameras[t].world_to_camera(
          detail::object_position(obj, cfg, t));
      pose.size = obj.size;
      if (!(pose.translation.z() > 0.0)) {
        throw DomainError("generate_scene: object behind camera at frame " +
                          std::to_string(t));
      }
      frame.gt_poses.push_back(pose);
    }
  }
  for (int t = 1; t < cfg.n_frames; ++t) {
    SceneFrame& frame = scene.frames[t];
    frame.correspondences.reserve(plane_points.size());
    for (const Vec3& pw : plane_points) {
      const Vec3 prev_cam = cameras[t - 1].world_to_camera(pw);
      const Vec3 curr_cam = cameras[t].world_to_camera(pw);
      if (!(prev_cam.z() > 1e-6) || !(curr_cam.z() > 1e-6)) continue;
      Correspondence c;
      c.prev = project(scene.intrinsics, prev_cam);
      c.curr = project(scene.intrinsics, curr_cam);
      const double outlier_draw = rng.uniform();
      if (outlier_draw < cfg.outlier_rate) {
        c.curr = Vec2(rng.uniform(0.0, scene.intrinsics.width),
                      rng.uniform(0.0, scene.intrinsics.height));
      } else {
        c.prev += cfg.corr_noise_sigma * Vec2(rng.normal(), rng.normal());
        c.curr += cfg.corr_noise_sigma * Vec2(rng.normal(), rng.normal());
      }
      frame.correspondences.push_back(c);
    }
  }
  return scene;
}

/// Runs the synthetic detector over every capture frame and attaches each
/// emitted detection to its delivery frame (capture + latency). Detections
/// whose delivery falls past the end of the scene are dropped.
inline void schedule_detections(Scene* scene, const StubConfig& cfg) {
  if (!cfg.is_valid()) {
    throw ConfigError("stub config invalid");
  }
  scene->stub = cfg;
  for (auto& frame : scene->frames) frame.detections.clear();
  const int n = static_cast<int>(scene->frames.size());
  for (int capture = 0; capture < n; ++capture) {
    const std::vector<Detection> dets = stub_detect(
        scene->intrinsics, scene->frames[capture].gt_poses, capture, cfg);
    const int delivery = capture + cfg.latency;
    if (delivery >= n) continue;
    for (const Detection& d : dets) {
      scene->frames[delivery].detections.push_back(d);
    }
  }
}

}  // namespace boxtrack
