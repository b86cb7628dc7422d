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

#include <gtest/gtest.h>

#include "boxtrack/detector.hpp"
#include "boxtrack/epnp.hpp"
#include "test_support.hpp"

namespace boxtrack {
namespace {

using testing::default_camera;
using testing::rotation_angle;

BoxPose centered_pose() {
  BoxPose pose;
  // Slightly off-axis so the projected centroid is not on a cell boundary.
  pose.translation = Vec3(0.03, 0.021, 2.5);
  pose.size = Vec3(0.6, 0.5, 0.4);
  return pose;
}

TEST(RenderHeatmap, PeaksAtCentroidCellAndIsUnimodal) {
  const CameraIntrinsics k = default_camera();
  const BoxPose pose = centered_pose();
  const Heatmap h = render_gt_heatmap(k, pose, 0.1, 40, 30);

  const KeypointSet2D kp = project_box(k, pose);
  const int cx = static_cast<int>(kp.points[0].x() / h.stride);
  const int cy = static_cast<int>(kp.points[0].y() / h.stride);

  double max_val = 0.0;
  int max_ix = -1, max_iy = -1;
  for (int iy = 0; iy < h.height; ++iy) {
    for (int ix = 0; ix < h.width; ++ix) {
      if (h.at(ix, iy) > max_val) {
        max_val = h.at(ix, iy);
        max_ix = ix;
        max_iy = iy;
      }
    }
  }
  EXPECT_EQ(max_ix, cx);
  EXPECT_EQ(max_iy, cy);

  // Quantization bound: peak cell value >= exp(-delta^2 / (2 sigma^2)) with
  // delta <= stride / 2 per axis.
  const Rect extent = keypoint_extent(kp);
  const double su = 0.1 * extent.width(), sv = 0.1 * extent.height();
  const double du = 0.5 * h.stride / su, dv = 0.5 * h.stride / sv;
  EXPECT_GE(max_val, std::exp(-0.5 * (du * du + dv * dv)) - 1e-12);

  // Strictly decreasing along grid rows/columns away from the peak.
  for (int ix = max_ix; ix + 1 < h.width; ++ix) {
    EXPECT_GT(h.at(ix, max_iy), h.at(ix + 1, max_iy));
  }
  for (int ix = max_ix; ix > 0; --ix) {
    EXPECT_GT(h.at(ix, max_iy), h.at(ix - 1, max_iy));
  }
  for (int iy = max_iy; iy + 1 < h.height; ++iy) {
    EXPECT_GT(h.at(max_ix, iy), h.at(max_ix, iy + 1));
  }
  for (int iy = max_iy; iy > 0; --iy) {
    EXPECT_GT(h.at(max_ix, iy), h.at(max_ix, iy - 1));
  }
}

TEST(RenderHeatmap, SigmaScalesWithBeta) {
  const CameraIntrinsics k = default_camera();
  const BoxPose pose = centered_pose();
  const KeypointSet2D kp = project_box(k, pose);
  const Rect extent = keypoint_extent(kp);

  // Bilinear read of the half-max contour along u: value at u0 + sigma_u
  // should be exp(-1/2) within interpolation tolerance. A 4 px stride keeps
  // the bilinear error of the Gaussian under the 0.02 budget.
  for (const double beta : {0.1, 0.2}) {
    const Heatmap h = render_gt_heatmap(k, pose, beta, 160, 120);
    const double sigma_u = beta * extent.width();
    const double u = kp.points[0].x() + sigma_u;
    const double v = kp.points[0].y();
    const double gx = u / h.stride - 0.5;
    const double gy = v / h.stride - 0.5;
    const int ix = static_cast<int>(std::floor(gx));
    const int iy = static_cast<int>(std::floor(gy));
    const double fx = gx - ix, fy = gy - iy;
    const double value =
        (1 - fx) * (1 - fy) * h.at(ix, iy) + fx * (1 - fy) * h.at(ix + 1, iy) +
        (1 - fx) * fy * h.at(ix, iy + 1) + fx * fy * h.at(ix + 1, iy + 1);
    EXPECT_NEAR(value, std::exp(-0.5), 0.02) << "beta " << beta;
  }
}

TEST(RenderHeatmap, CentroidOutsideViewportThrows) {
  BoxPose pose = centered_pose();
  pose.translation = Vec3(5.0, 0.0, 2.0);  // projects far beyond the viewport
  EXPECT_THROW(render_gt_heatmap(default_camera(), pose, 0.1, 40, 30),
               DomainError);
}

TEST(Decode, RecoversSyntheticDetection) {
  const CameraIntrinsics k = default_camera();
  const BoxPose pose = centered_pose();
  const Heatmap h = render_gt_heatmap(k, pose, 0.1, 40, 30);
  const VertexField f = render_gt_vertex_field(k, pose, 40, 30);

  const std::vector<Detection> dets = decode(h, f, 0.3, 2.0);
  ASSERT_EQ(dets.size(), 1u);

  const KeypointSet2D truth = project_box(k, pose);
  // Center is grid-quantized; corners add exact offsets from the peak cell.
  EXPECT_LE((dets[0].keypoints.points[0] - truth.points[0]).lpNorm<Eigen::Infinity>(),
            0.5 * h.stride);
  for (int i = 1; i < kNumKeypoints; ++i) {
    EXPECT_LT((dets[0].keypoints.points[i] - truth.points[i]).norm(), 1e-9);
  }
}

TEST(Decode, EmptyHeatmapGivesNothing) {
  Heatmap h;
  h.width = 8;
  h.height = 6;
  h.stride = 16.0;
  h.values.assign(48, 0.0);
  VertexField f;
  f.width = 8;
  f.height = 6;
  f.stride = 16.0;
  f.offsets.assign(48, {});
  EXPECT_TRUE(decode(h, f, 0.25, 2.0).empty());
}

TEST(Decode, TwoSeparatedPeaksComeOutScoreOrdered) {
  Heatmap h;
  h.width = 32;
  h.height = 24;
  h.stride = 20.0;
  h.values.assign(32 * 24, 0.0);
  VertexField f;
  f.width = 32;
  f.height = 24;
  f.stride = 20.0;
  f.offsets.assign(32 * 24, {});

  auto add_gaussian = [&](double cx, double cy, double amp) {
    for (int iy = 0; iy < h.height; ++iy) {
      for (int ix = 0; ix < h.width; ++ix) {
        const double d2 = (ix - cx) * (ix - cx) + (iy - cy) * (iy - cy);
        h.values[iy * h.width + ix] += amp * std::exp(-d2 / 8.0);
      }
    }
  };
  add_gaussian(8.0, 12.0, 0.7);
  add_gaussian(24.0, 12.0, 0.95);  // separation 16 cells > 2 * nms_radius

  const std::vector<Detection> dets = decode(h, f, 0.3, 3.0);
  ASSERT_EQ(dets.size(), 2u);
  EXPECT_GT(dets[0].score, dets[1].score);
  EXPECT_NEAR(dets[0].keypoints.points[0].x(), (24.0 + 0.5) * 20.0, 20.0);
  EXPECT_NEAR(dets[1].keypoints.points[0].x(), (8.0 + 0.5) * 20.0, 20.0);
}

TEST(Decode, NearbyPeakIsSuppressed) {
  Heatmap h;
  h.width = 16;
  h.height = 16;
  h.stride = 16.0;
  h.values.assign(256, 0.0);
  h.values[8 * 16 + 8] = 1.0;
  h.values[8 * 16 + 10] = 0.8;  // within radius 3 of the stronger peak
  VertexField f;
  f.width = 16;
  f.height = 16;
  f.stride = 16.0;
  f.offsets.assign(256, {});
  const std::vector<Detection> dets = decode(h, f, 0.5, 3.0);
  ASSERT_EQ(dets.size(), 1u);
  EXPECT_DOUBLE_EQ(dets[0].score, 1.0);
}

TEST(StubDetect, NoiseFreeMatchesGroundTruth) {
  const CameraIntrinsics k = default_camera();
  const BoxPose pose = centered_pose();
  StubConfig cfg;  // sigma 0, cadence 1, latency 0, dropout 0
  const std::vector<BoxPose> poses{pose};
  const std::vector<Detection> dets = stub_detect(k, poses, 0, cfg);
  ASSERT_EQ(dets.size(), 1u);
  const KeypointSet2D truth = project_box(k, pose);
  for (int i = 0; i < kNumKeypoints; ++i) {
    EXPECT_DOUBLE_EQ(dets[0].keypoints.points[i].x(), truth.points[i].x());
    EXPECT_DOUBLE_EQ(dets[0].keypoints.points[i].y(), truth.points[i].y());
  }
  EXPECT_DOUBLE_EQ(dets[0].score, 1.0);
}

TEST(StubDetect, CadenceSchedule) {
  const CameraIntrinsics k = default_camera();
  const std::vector<BoxPose> poses{centered_pose()};
  StubConfig cfg;
  cfg.cadence = 5;
  std::vector<int> emitted;
  for (int frame = 0; frame < 20; ++frame) {
    if (!stub_detect(k, poses, frame, cfg).empty()) emitted.push_back(frame);
  }
  EXPECT_EQ(emitted, (std::vector<int>{0, 5, 10, 15}));
}

TEST(StubDetect, SeededNoiseReplaysBitwise) {
  const CameraIntrinsics k = default_camera();
  const std::vector<BoxPose> poses{centered_pose()};
  StubConfig cfg;
  cfg.noise_sigma = 2.0;
  cfg.seed = 1234;
  for (int frame = 0; frame < 5; ++frame) {
    const auto a = stub_detect(k, poses, frame, cfg);
    const auto b = stub_detect(k, poses, frame, cfg);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t d = 0; d < a.size(); ++d) {
      for (int i = 0; i < kNumKeypoints; ++i) {
        EXPECT_EQ(a[d].keypoints.points[i].x(), b[d].keypoints.points[i].x());
        EXPECT_EQ(a[d].keypoints.points[i].y(), b[d].keypoints.points[i].y());
      }
      EXPECT_EQ(a[d].score, b[d].score);
    }
  }
}

TEST(StubDetect, DropoutIsSeededAndInRate) {
  const CameraIntrinsics k = default_camera();
  const std::vector<BoxPose> poses{centered_pose()};
  StubConfig cfg;
  cfg.dropout = 0.3;
  cfg.seed = 7;
  int emitted = 0;
  const int frames = 2000;
  for (int frame = 0; frame < frames; ++frame) {
    emitted += stub_detect(k, poses, frame, cfg).empty() ? 0 : 1;
  }
  EXPECT_NEAR(static_cast<double>(emitted) / frames, 0.7, 0.05);
}

TEST(StubDetect, NoiseFreeLiftReproducesPose) {
  const CameraIntrinsics k = default_camera();
  Rng rng(301);
  for (int trial = 0; trial < 10; ++trial) {
    const BoxPose pose = testing::random_pose(rng);
    const std::vector<BoxPose> poses{pose};
    const auto dets = stub_detect(k, poses, 0, StubConfig{});
    ASSERT_EQ(dets.size(), 1u);
    const LiftResult lr = lift(k, dets[0].keypoints);
    const OrientedBoxVertices rescaled =
        rescale_to_canonical(lr.vertices, pose.size);
    const PoseFit fit = fit_pose_from_vertices(rescaled);
    EXPECT_LT(rotation_angle(fit.pose.rotation, pose.rotation), 1e-5);
  }
}

}  // namespace
}  // namespace boxtrack
