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

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "boxtrack/boxtrack.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

boxtrack::RunConfig load_config(const CommonArgs& args) {
  boxtrack::RunConfig cfg;
  if (!args.config_path.empty()) {
    cfg = boxtrack::run_config_from_json(
        boxtrack::load_json_file(args.config_path));
  }
  if (args.seed.has_value()) {
    cfg.trajectory.seed = *args.seed;
    cfg.stub.seed = *args.seed;
    cfg.pipeline.ransac.seed = *args.seed;
  }
  if (args.verbose && boxtrack::log_level() < boxtrack::LogLevel::kInfo) {
    boxtrack::log_level() = boxtrack::LogLevel::kInfo;
  }
  return cfg;
}

std::string frame_filename(int frame) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%05d.ppm", frame);
  return buf;
}

int cmd_simulate(const CommonArgs& args, const std::string& out_path) {
  const boxtrack::RunConfig cfg = load_config(args);
  boxtrack::Scene scene =
      boxtrack::generate_scene(cfg.trajectory, cfg.intrinsics);
  boxtrack::schedule_detections(&scene, cfg.stub);
  boxtrack::write_json_file(out_path, boxtrack::scene_to_json(scene));
  boxtrack::log_message(boxtrack::LogLevel::kInfo,
                        "wrote scene with " +
                            std::to_string(scene.frames.size()) +
                            " frames to " + out_path);
  return kExitOk;
}

int cmd_track(const CommonArgs& args, const std::string& scene_path,
              const std::string& out_path, const std::string& overlay_dir) {
  const boxtrack::RunConfig cfg = load_config(args);
  const boxtrack::Scene scene =
      boxtrack::scene_from_json(boxtrack::load_json_file(scene_path));

  if (!overlay_dir.empty()) {
    std::filesystem::create_directories(overlay_dir);
  }

  boxtrack::Pipeline pipeline(scene.intrinsics, cfg.pipeline);
  boxtrack::PipelineResult result;
  bool failed = false;
  for (const boxtrack::SceneFrame& frame : scene.frames) {
    try {
      const std::vector<boxtrack::PoseRecord> records = pipeline.step(frame);
      result.records.insert(result.records.end(), records.begin(),
                            records.end());
      if (!overlay_dir.empty()) {
        const boxtrack::Image img =
            boxtrack::render_overlay(scene.intrinsics, records);
        boxtrack::write_ppm(
            overlay_dir + "/" + frame_filename(frame.frame_id), img);
      }
    } catch (const std::exception& e) {
      boxtrack::log_message(boxtrack::LogLevel::kError,
                            "tracking failed at frame " +
                                std::to_string(frame.frame_id) + ": " +
                                e.what());
      failed = true;
      break;
    }
  }
  result.events = pipeline.events();
  boxtrack::write_json_file(out_path, boxtrack::pose_stream_to_json(result));
  return failed ? kExitRuntime : kExitOk;
}

int cmd_eval(const std::string& poses_path, const std::string& scene_path,
             const std::string& out_path, std::vector<double> thresholds) {
  const boxtrack::Scene scene =
      boxtrack::scene_from_json(boxtrack::load_json_file(scene_path));
  const boxtrack::PipelineResult result =
      boxtrack::pose_stream_from_json(boxtrack::load_json_file(poses_path));
  if (thresholds.empty()) thresholds.push_back(0.5);
  const boxtrack::MetricsReport report =
      boxtrack::compute_metrics(scene, result, thresholds);
  boxtrack::write_json_file(out_path, boxtrack::metrics_to_json(report));
  for (const auto& [thresh, ap] : report.ap) {
    std::printf("AP@%.2f = %.6f\n", thresh, ap);
  }
  if (report.mean_jitter_px.has_value()) {
    std::printf("mean jitter = %.6f px\n", *report.mean_jitter_px);
  } else {
    std::printf("mean jitter = undefined\n");
  }
  return kExitOk;
}

int cmd_render(const std::string& scene_path, const std::string& poses_path,
               const std::string& overlay_dir) {
  const boxtrack::Scene scene =
      boxtrack::scene_from_json(boxtrack::load_json_file(scene_path));
  const boxtrack::PipelineResult result =
      boxtrack::pose_stream_from_json(boxtrack::load_json_file(poses_path));
  std::filesystem::create_directories(overlay_dir);

  std::vector<std::vector<boxtrack::PoseRecord>> per_frame(
      scene.frames.size());
  for (const boxtrack::PoseRecord& r : result.records) {
    if (r.frame >= 0 && r.frame < static_cast<int>(per_frame.size())) {
      per_frame[r.frame].push_back(r);
    }
  }
  for (std::size_t t = 0; t < per_frame.size(); ++t) {
    const boxtrack::Image img =
        boxtrack::render_overlay(scene.intrinsics, per_frame[t]);
    boxtrack::write_ppm(
        overlay_dir + "/" + frame_filename(static_cast<int>(t)), img);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "boxtrack: 9-DoF 3D bounding-box tracking on synthetic scenes.\n"
      "Config files are JSON documents (schema \"boxtrack9/1\") with\n"
      "optional sections: intrinsics, trajectory, stub, pipeline. Absent\n"
      "fields take the defaults shown by `boxtrack defaults`; unknown keys\n"
      "are rejected. Set BOXTRACK_LOG=error|warn|info|debug for logging."};
  app.require_subcommand(1);

  CommonArgs common;

  auto* simulate = app.add_subcommand(
      "simulate", "Generate a synthetic scene file (ground truth, plane "
                  "correspondences, scheduled detections).");
  std::string sim_out = "scene.json";
  simulate->add_option("--config", common.config_path,
                       "RunConfig JSON path (defaults apply when omitted)");
  simulate->add_option("--seed", common.seed,
                       "Override every seed in the config");
  simulate->add_option("--out", sim_out, "Output scene path")
      ->capture_default_str();
  simulate->add_flag("--verbose", common.verbose, "Log at info level");

  auto* track = app.add_subcommand(
      "track", "Run the detection-plus-tracking pipeline over a scene and "
               "write the pose stream.");
  std::string track_scene, track_out = "poses.json", track_overlay;
  track->add_option("scene", track_scene, "Scene JSON path")->required();
  track->add_option("--config", common.config_path, "RunConfig JSON path");
  track->add_option("--seed", common.seed,
                    "Override every seed in the config");
  track->add_option("--out", track_out, "Output pose-stream path")
      ->capture_default_str();
  track->add_option("--overlay", track_overlay,
                    "Directory for per-frame PPM wireframe overlays");
  track->add_flag("--verbose", common.verbose, "Log at info level");

  auto* eval = app.add_subcommand(
      "eval", "Score a pose stream against scene ground truth (AP, pose "
              "errors, jitter).");
  std::string eval_poses, eval_scene, eval_out = "metrics.json";
  std::vector<double> eval_thresholds;
  eval->add_option("poses", eval_poses, "Pose-stream JSON path")->required();
  eval->add_option("scene", eval_scene, "Scene JSON path")->required();
  eval->add_option("--out", eval_out, "Output metrics path")
      ->capture_default_str();
  eval->add_option("--iou", eval_thresholds,
                   "3D IoU thresholds for AP (default 0.5)");
  eval->add_flag("--verbose", common.verbose, "Log at info level");

  auto* render = app.add_subcommand(
      "render", "Re-render PPM wireframe overlays from a scene and a pose "
                "stream.");
  std::string render_scene, render_poses, render_dir;
  render->add_option("scene", render_scene, "Scene JSON path")->required();
  render->add_option("poses", render_poses, "Pose-stream JSON path")
      ->required();
  render->add_option("--overlay", render_dir, "Output directory")->required();
  render->add_flag("--verbose", common.verbose, "Log at info level");

  auto* defaults = app.add_subcommand(
      "defaults", "Print the full default configuration as JSON.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;  // --help exits 0
  }

  try {
    if (simulate->parsed()) return cmd_simulate(common, sim_out);
    if (track->parsed()) {
      return cmd_track(common, track_scene, track_out, track_overlay);
    }
    if (eval->parsed()) {
      return cmd_eval(eval_poses, eval_scene, eval_out, eval_thresholds);
    }
    if (render->parsed()) {
      return cmd_render(render_scene, render_poses, render_dir);
    }
    if (defaults->parsed()) {
      std::printf("%s\n",
                  boxtrack::run_config_to_json(boxtrack::RunConfig{})
                      .dump(1)
                      .c_str());
      return kExitOk;
    }
  } catch (const boxtrack::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const boxtrack::MetricError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
