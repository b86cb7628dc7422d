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

#include <fstream>
#include <initializer_list>
#include <string>

#include <json.hpp>

#include "boxtrack/common.hpp"
#include "boxtrack/sim.hpp"
#include "boxtrack/tracker.hpp"

namespace boxtrack {

using Json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "boxtrack9/1";

namespace io_detail {

inline void require_keys(const Json& j, const std::string& context,
                         std::initializer_list<const char*> allowed) {
  if (!j.is_object()) {
    throw ConfigError(context + " must be a JSON object");
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError("unknown key '" + context + "." + it.key() + "'");
    }
  }
}

template <typename T>
T get_or(const Json& j, const char* key, const T& fallback,
         const std::string& context) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError("bad value for '" + context + "." + key + "'");
  }
}

inline Json vec3_to_json(const Vec3& v) {
  return Json::array({v.x(), v.y(), v.z()});
}

inline Vec3 vec3_from_json(const Json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError(context + " must be a 3-element array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline Json mat3_to_json(const Mat3& m) {
  Json a = Json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) a.push_back(m(r, c));
  }
  return a;
}

inline Mat3 mat3_from_json(const Json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 9) {
    throw ConfigError(context + " must be a row-major 9-element array");
  }
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m(r, c) = j[3 * r + c].get<double>();
  }
  return m;
}

inline Json keypoints_to_json(const KeypointSet2D& kp) {
  Json a = Json::array();
  for (const Vec2& p : kp.points) a.push_back(Json::array({p.x(), p.y()}));
  return a;
}

inline KeypointSet2D keypoints_from_json(const Json& j,
                                         const std::string& context) {
  if (!j.is_array() || j.size() != kNumKeypoints) {
    throw ConfigError(context + " must hold 9 [u, v] pairs");
  }
  KeypointSet2D kp;
  for (int i = 0; i < kNumKeypoints; ++i) {
    const Json& p = j[i];
    if (!p.is_array() || p.size() != 2) {
      throw ConfigError(context + " must hold 9 [u, v] pairs");
    }
    kp.points[i] = Vec2(p[0].get<double>(), p[1].get<double>());
  }
  return kp;
}

inline void check_schema(const Json& j, const std::string& context) {
  if (!j.is_object() || !j.contains("schema") ||
      j.at("schema") != kSchemaVersion) {
    throw ConfigError(context + ": missing or unsupported schema (expected " +
                      std::string(kSchemaVersion) + ")");
  }
}

}  // namespace io_detail

// ---------------------------------------------------------------------------
// Configs

inline Json intrinsics_to_json(const CameraIntrinsics& k) {
  return Json{{"fx", k.fx},         {"fy", k.fy},   {"cx", k.cx},
              {"cy", k.cy},         {"width", k.width},
              {"height", k.height}};
}

inline CameraIntrinsics intrinsics_from_json(const Json& j,
                                             const std::string& context) {
  io_detail::require_keys(j, context,
                          {"fx", "fy", "cx", "cy", "width", "height"});
  CameraIntrinsics k;
  k.fx = io_detail::get_or(j, "fx", k.fx, context);
  k.fy = io_detail::get_or(j, "fy", k.fy, context);
  k.cx = io_detail::get_or(j, "cx", k.cx, context);
  k.cy = io_detail::get_or(j, "cy", k.cy, context);
  k.width = io_detail::get_or(j, "width", k.width, context);
  k.height = io_detail::get_or(j, "height", k.height, context);
  if (!k.is_valid()) throw ConfigError(context + ": invalid intrinsics");
  return k;
}

inline Json trajectory_to_json(const TrajectoryConfig& t) {
  const char* cam = nullptr;
  switch (t.camera_motion) {
    case CameraMotion::kOrbit: cam = "orbit"; break;
    case CameraMotion::kTranslate: cam = "translate"; break;
    case CameraMotion::kHandheld: cam = "handheld"; break;
    case CameraMotion::kPan: cam = "pan"; break;
  }
  const char* obj = nullptr;
  switch (t.object_motion) {
    case ObjectMotion::kStatic: obj = "static"; break;
    case ObjectMotion::kTranslate: obj = "translate"; break;
    case ObjectMotion::kRoll: obj = "roll"; break;
  }
  return Json{
      {"n_frames", t.n_frames},
      {"n_objects", t.n_objects},
      {"camera_motion",
       Json{{"type", cam},
            {"orbit_rate", t.orbit_rate},
            {"velocity", io_detail::vec3_to_json(t.camera_velocity)},
            {"pan_rate", t.pan_rate},
            {"jitter_position", t.jitter_position},
            {"jitter_target", t.jitter_target}}},
      {"object_motion",
       Json{{"type", obj},
            {"velocity", io_detail::vec3_to_json(t.object_velocity)},
            {"roll_rate", t.roll_rate}}},
      {"plane_points", t.plane_points},
      {"corr_noise_sigma", t.corr_noise_sigma},
      {"outlier_rate", t.outlier_rate},
      {"camera_distance", t.camera_distance},
      {"camera_height", t.camera_height},
      {"object_spacing", t.object_spacing},
      {"seed", t.seed}};
}

inline TrajectoryConfig trajectory_from_json(const Json& j,
                                             const std::string& context) {
  io_detail::require_keys(
      j, context,
      {"n_frames", "n_objects", "camera_motion", "object_motion",
       "plane_points", "corr_noise_sigma", "outlier_rate", "camera_distance",
       "camera_height", "object_spacing", "seed"});
  TrajectoryConfig t;
  t.n_frames = io_detail::get_or(j, "n_frames", t.n_frames, context);
  t.n_objects = io_detail::get_or(j, "n_objects", t.n_objects, context);

  if (j.contains("camera_motion")) {
    const Json& c = j.at("camera_motion");
    const std::string ctx = context + ".camera_motion";
    io_detail::require_keys(c, ctx,
                            {"type", "orbit_rate", "velocity", "pan_rate",
                             "jitter_position", "jitter_target"});
    const std::string type = io_detail::get_or<std::string>(c, "type",
                                                            "orbit", ctx);
    if (type == "orbit") {
      t.camera_motion = CameraMotion::kOrbit;
    } else if (type == "translate") {
      t.camera_motion = CameraMotion::kTranslate;
    } else if (type == "handheld") {
      t.camera_motion = CameraMotion::kHandheld;
    } else if (type == "pan") {
      t.camera_motion = CameraMotion::kPan;
    } else {
      throw ConfigError("bad value for '" + ctx + ".type'");
    }
    t.orbit_rate = io_detail::get_or(c, "orbit_rate", t.orbit_rate, ctx);
    if (c.contains("velocity")) {
      t.camera_velocity =
          io_detail::vec3_from_json(c.at("velocity"), ctx + ".velocity");
    }
    t.pan_rate = io_detail::get_or(c, "pan_rate", t.pan_rate, ctx);
    t.jitter_position =
        io_detail::get_or(c, "jitter_position", t.jitter_position, ctx);
    t.jitter_target =
        io_detail::get_or(c, "jitter_target", t.jitter_target, ctx);
  }
  if (j.contains("object_motion")) {
    const Json& o = j.at("object_motion");
    const std::string ctx = context + ".object_motion";
    io_detail::require_keys(o, ctx, {"type", "velocity", "roll_rate"});
    const std::string type = io_detail::get_or<std::string>(o, "type",
                                                            "static", ctx);
    if (type == "static") {
      t.object_motion = ObjectMotion::kStatic;
    } else if (type == "translate") {
      t.object_motion = ObjectMotion::kTranslate;
    } else if (type == "roll") {
      t.object_motion = ObjectMotion::kRoll;
    } else {
      throw ConfigError("bad value for '" + ctx + ".type'");
    }
    if (o.contains("velocity")) {
      t.object_velocity =
          io_detail::vec3_from_json(o.at("velocity"), ctx + ".velocity");
    }
    t.roll_rate = io_detail::get_or(o, "roll_rate", t.roll_rate, ctx);
  }
  t.plane_points = io_detail::get_or(j, "plane_points", t.plane_points,
                                     context);
  t.corr_noise_sigma =
      io_detail::get_or(j, "corr_noise_sigma", t.corr_noise_sigma, context);
  t.outlier_rate = io_detail::get_or(j, "outlier_rate", t.outlier_rate,
                                     context);
  t.camera_distance =
      io_detail::get_or(j, "camera_distance", t.camera_distance, context);
  t.camera_height = io_detail::get_or(j, "camera_height", t.camera_height,
                                      context);
  t.object_spacing =
      io_detail::get_or(j, "object_spacing", t.object_spacing, context);
  t.seed = io_detail::get_or(j, "seed", t.seed, context);
  return t;
}

inline Json stub_to_json(const StubConfig& s) {
  return Json{{"noise_sigma", s.noise_sigma},
              {"cadence", s.cadence},
              {"latency", s.latency},
              {"dropout", s.dropout},
              {"seed", s.seed}};
}

inline StubConfig stub_from_json(const Json& j, const std::string& context) {
  io_detail::require_keys(
      j, context, {"noise_sigma", "cadence", "latency", "dropout", "seed"});
  StubConfig s;
  s.noise_sigma = io_detail::get_or(j, "noise_sigma", s.noise_sigma, context);
  s.cadence = io_detail::get_or(j, "cadence", s.cadence, context);
  s.latency = io_detail::get_or(j, "latency", s.latency, context);
  s.dropout = io_detail::get_or(j, "dropout", s.dropout, context);
  s.seed = io_detail::get_or(j, "seed", s.seed, context);
  if (!s.is_valid()) throw ConfigError(context + ": invalid stub config");
  return s;
}

inline Json ransac_to_json(const RansacConfig& r) {
  return Json{{"inlier_threshold", r.inlier_threshold},
              {"max_iterations", r.max_iterations},
              {"min_inliers", r.min_inliers},
              {"seed", r.seed},
              {"adaptive_exit", r.adaptive_exit}};
}

inline RansacConfig ransac_from_json(const Json& j,
                                     const std::string& context) {
  io_detail::require_keys(j, context,
                          {"inlier_threshold", "max_iterations",
                           "min_inliers", "seed", "adaptive_exit"});
  RansacConfig r;
  r.inlier_threshold =
      io_detail::get_or(j, "inlier_threshold", r.inlier_threshold, context);
  r.max_iterations =
      io_detail::get_or(j, "max_iterations", r.max_iterations, context);
  r.min_inliers = io_detail::get_or(j, "min_inliers", r.min_inliers, context);
  r.seed = io_detail::get_or(j, "seed", r.seed, context);
  r.adaptive_exit =
      io_detail::get_or(j, "adaptive_exit", r.adaptive_exit, context);
  return r;
}

inline Json pipeline_to_json(const PipelineConfig& p) {
  return Json{{"consolidation_iou", p.consolidation_iou},
              {"max_missed", p.max_missed},
              {"region_margin", p.region_margin},
              {"blend_weight", p.blend_weight},
              {"ransac", ransac_to_json(p.ransac)}};
}

inline PipelineConfig pipeline_from_json(const Json& j,
                                         const std::string& context) {
  io_detail::require_keys(j, context,
                          {"consolidation_iou", "max_missed", "region_margin",
                           "blend_weight", "ransac"});
  PipelineConfig p;
  p.consolidation_iou =
      io_detail::get_or(j, "consolidation_iou", p.consolidation_iou, context);
  p.max_missed = io_detail::get_or(j, "max_missed", p.max_missed, context);
  p.region_margin =
      io_detail::get_or(j, "region_margin", p.region_margin, context);
  p.blend_weight =
      io_detail::get_or(j, "blend_weight", p.blend_weight, context);
  if (j.contains("ransac")) {
    p.ransac = ransac_from_json(j.at("ransac"), context + ".ransac");
  }
  p.validate();
  return p;
}

/// Union of all tool configuration, parsed from one JSON document with
/// defaults for absent sections and rejection of unknown keys.
struct RunConfig {
  CameraIntrinsics intrinsics;
  TrajectoryConfig trajectory;
  StubConfig stub;
  PipelineConfig pipeline;
};

inline RunConfig run_config_from_json(const Json& j) {
  io_detail::require_keys(
      j, "config", {"schema", "intrinsics", "trajectory", "stub", "pipeline"});
  if (j.contains("schema") && j.at("schema") != kSchemaVersion) {
    throw ConfigError("config.schema: unsupported value");
  }
  RunConfig c;
  if (j.contains("intrinsics")) {
    c.intrinsics = intrinsics_from_json(j.at("intrinsics"), "intrinsics");
  }
  if (j.contains("trajectory")) {
    c.trajectory = trajectory_from_json(j.at("trajectory"), "trajectory");
  }
  if (j.contains("stub")) {
    c.stub = stub_from_json(j.at("stub"), "stub");
  }
  if (j.contains("pipeline")) {
    c.pipeline = pipeline_from_json(j.at("pipeline"), "pipeline");
  }
  return c;
}

inline Json run_config_to_json(const RunConfig& c) {
  return Json{{"schema", kSchemaVersion},
              {"intrinsics", intrinsics_to_json(c.intrinsics)},
              {"trajectory", trajectory_to_json(c.trajectory)},
              {"stub", stub_to_json(c.stub)},
              {"pipeline", pipeline_to_json(c.pipeline)}};
}

// ---------------------------------------------------------------------------
// Scene documents

inline Json scene_to_json(const Scene& scene) {
  Json frames = Json::array();
  for (const SceneFrame& f : scene.frames) {
    Json poses = Json::array();
    for (const BoxPose& pose : f.gt_poses) {
      poses.push_back(
          Json{{"rotation", io_detail::mat3_to_json(pose.rotation)},
               {"translation", io_detail::vec3_to_json(pose.translation)},
               {"size", io_detail::vec3_to_json(pose.size)}});
    }
    Json corrs = Json::array();
    for (const Correspondence& c : f.correspondences) {
      corrs.push_back(
          Json::array({c.prev.x(), c.prev.y(), c.curr.x(), c.curr.y()}));
    }
    Json dets = Json::array();
    for (const Detection& d : f.detections) {
      dets.push_back(Json{{"capture_frame", d.frame_id},
                          {"score", d.score},
                          {"keypoints",
                           io_detail::keypoints_to_json(d.keypoints)}});
    }
    frames.push_back(
        Json{{"frame", f.frame_id},
             {"camera", Json{{"rotation", io_detail::mat3_to_json(
                                              f.camera.r_cw)},
                             {"position", io_detail::vec3_to_json(
                                              f.camera.position)}}},
             {"gt_poses", poses},
             {"correspondences", corrs},
             {"detections", dets}});
  }
  return Json{{"schema", kSchemaVersion},
              {"intrinsics", intrinsics_to_json(scene.intrinsics)},
              {"meta", Json{{"trajectory", trajectory_to_json(scene.trajectory)},
                            {"stub", stub_to_json(scene.stub)}}},
              {"frames", frames}};
}

inline Scene scene_from_json(const Json& j) {
  io_detail::check_schema(j, "scene");
  io_detail::require_keys(j, "scene",
                          {"schema", "intrinsics", "meta", "frames"});
  Scene scene;
  scene.intrinsics = intrinsics_from_json(j.at("intrinsics"),
                                          "scene.intrinsics");
  if (j.contains("meta")) {
    io_detail::require_keys(j.at("meta"), "scene.meta",
                            {"trajectory", "stub"});
    if (j.at("meta").contains("trajectory")) {
      scene.trajectory = trajectory_from_json(j.at("meta").at("trajectory"),
                                              "scene.meta.trajectory");
    }
    if (j.at("meta").contains("stub")) {
      scene.stub =
          stub_from_json(j.at("meta").at("stub"), "scene.meta.stub");
    }
  }
  if (!j.contains("frames") || !j.at("frames").is_array()) {
    throw ConfigError("scene.frames must be an array");
  }
  int expected_id = 0;
  for (const Json& fj : j.at("frames")) {
    io_detail::require_keys(
        fj, "scene.frames[]",
        {"frame", "camera", "gt_poses", "correspondences", "detections"});
    SceneFrame f;
    f.frame_id = io_detail::get_or(fj, "frame", -1, "scene.frames[]");
    if (f.frame_id != expected_id) {
      throw ConfigError("scene.frames: frame ids must be contiguous from 0");
    }
    ++expected_id;
    if (fj.contains("camera")) {
      const Json& cj = fj.at("camera");
      io_detail::require_keys(cj, "scene.frames[].camera",
                              {"rotation", "position"});
      f.camera.r_cw = io_detail::mat3_from_json(
          cj.at("rotation"), "scene.frames[].camera.rotation");
      f.camera.position = io_detail::vec3_from_json(
          cj.at("position"), "scene.frames[].camera.position");
    }
    for (const Json& pj : fj.value("gt_poses", Json::array())) {
      io_detail::require_keys(pj, "scene.frames[].gt_poses[]",
                              {"rotation", "translation", "size"});
      BoxPose pose;
      pose.rotation = io_detail::mat3_from_json(
          pj.at("rotation"), "scene.frames[].gt_poses[].rotation");
      pose.translation = io_detail::vec3_from_json(
          pj.at("translation"), "scene.frames[].gt_poses[].translation");
      pose.size = io_detail::vec3_from_json(pj.at("size"),
                                            "scene.frames[].gt_poses[].size");
      if (!(pose.translation.z() > 0.0)) {
        throw ConfigError("scene.frames[].gt_poses[]: non-positive depth");
      }
      f.gt_poses.push_back(pose);
    }
    for (const Json& cj : fj.value("correspondences", Json::array())) {
      if (!cj.is_array() || cj.size() != 4) {
        throw ConfigError(
            "scene.frames[].correspondences[] must be [pu, pv, cu, cv]");
      }
      Correspondence c;
      c.prev = Vec2(cj[0].get<double>(), cj[1].get<double>());
      c.curr = Vec2(cj[2].get<double>(), cj[3].get<double>());
      f.correspondences.push_back(c);
    }
    for (const Json& dj : fj.value("detections", Json::array())) {
      io_detail::require_keys(dj, "scene.frames[].detections[]",
                              {"capture_frame", "score", "keypoints"});
      Detection d;
      d.frame_id = io_detail::get_or(dj, "capture_frame", 0,
                                     "scene.frames[].detections[]");
      d.score = io_detail::get_or(dj, "score", 1.0,
                                  "scene.frames[].detections[]");
      d.keypoints = io_detail::keypoints_from_json(
          dj.at("keypoints"), "scene.frames[].detections[].keypoints");
      if (!d.is_valid()) {
        throw ConfigError("scene.frames[].detections[]: invalid detection");
      }
      f.detections.push_back(d);
    }
    scene.frames.push_back(std::move(f));
  }
  return scene;
}

// ---------------------------------------------------------------------------
// Pose stream documents

inline Json pose_stream_to_json(const PipelineResult& result) {
  Json records = Json::array();
  for (const PoseRecord& r : result.records) {
    records.push_back(
        Json{{"frame", r.frame},
             {"id", r.id},
             {"keypoints", io_detail::keypoints_to_json(r.keypoints)},
             {"rotation", io_detail::mat3_to_json(r.pose.rotation)},
             {"translation", io_detail::vec3_to_json(r.pose.translation)},
             {"size", io_detail::vec3_to_json(r.pose.size)},
             {"residual", r.residual}});
  }
  Json events = Json::array();
  for (const TrackEvent& e : result.events) {
    events.push_back(Json{{"frame", e.frame}, {"id", e.id}, {"type", e.type}});
  }
  return Json{{"schema", kSchemaVersion},
              {"records", records},
              {"events", events}};
}

inline PipelineResult pose_stream_from_json(const Json& j) {
  io_detail::check_schema(j, "poses");
  io_detail::require_keys(j, "poses", {"schema", "records", "events"});
  PipelineResult result;
  for (const Json& rj : j.value("records", Json::array())) {
    io_detail::require_keys(rj, "poses.records[]",
                            {"frame", "id", "keypoints", "rotation",
                             "translation", "size", "residual"});
    PoseRecord r;
    r.frame = io_detail::get_or(rj, "frame", 0, "poses.records[]");
    r.id = io_detail::get_or(rj, "id", 0, "poses.records[]");
    r.keypoints = io_detail::keypoints_from_json(rj.at("keypoints"),
                                                 "poses.records[].keypoints");
    r.pose.rotation = io_detail::mat3_from_json(rj.at("rotation"),
                                                "poses.records[].rotation");
    r.pose.translation = io_detail::vec3_from_json(
        rj.at("translation"), "poses.records[].translation");
    r.pose.size =
        io_detail::vec3_from_json(rj.at("size"), "poses.records[].size");
    r.residual = io_detail::get_or(rj, "residual", 0.0, "poses.records[]");
    result.records.push_back(std::move(r));
  }
  for (const Json& ej : j.value("events", Json::array())) {
    io_detail::require_keys(ej, "poses.events[]", {"frame", "id", "type"});
    TrackEvent e;
    e.frame = io_detail::get_or(ej, "frame", 0, "poses.events[]");
    e.id = io_detail::get_or(ej, "id", 0, "poses.events[]");
    e.type = io_detail::get_or<std::string>(ej, "type", "", "poses.events[]");
    result.events.push_back(std::move(e));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Files

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigError("cannot parse '" + path + "': " + e.what());
  }
  return j;
}

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << j.dump(1) << "\n";
}

}  // namespace boxtrack
