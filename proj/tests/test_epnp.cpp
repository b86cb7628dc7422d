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

#include "boxtrack/epnp.hpp"
#include "test_support.hpp"

namespace boxtrack {
namespace {

using testing::default_camera;
using testing::random_pose;
using testing::rotation_angle;

TEST(BarycentricTable, ForcedRows) {
  const BarycentricTable& t = barycentric_table();
  // Corner (-1,-1,-1) is keypoint 1, corner (+1,+1,+1) is keypoint 8.
  EXPECT_TRUE(t.row(1).isApprox(Eigen::RowVector4d(4, -1, -1, -1)));
  EXPECT_TRUE(t.row(8).isApprox(Eigen::RowVector4d(-2, 1, 1, 1)));
  EXPECT_TRUE(t.row(0).isApprox(Eigen::RowVector4d(1, 0, 0, 0)));
  for (int i = 0; i < kNumKeypoints; ++i) {
    EXPECT_NEAR(t.row(i).sum(), 1.0, 1e-12);
  }
}

TEST(BarycentricTable, ReconstructsVerticesFromControlPoints) {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const BoxPose pose = random_pose(rng);
    Eigen::Matrix<double, 4, 3> controls;
    controls.row(0) = pose.translation;
    for (int axis = 0; axis < 3; ++axis) {
      controls.row(axis + 1) =
          pose.translation + 0.5 * pose.size[axis] * pose.rotation.col(axis);
    }
    const Eigen::Matrix<double, kNumKeypoints, 3> recon =
        barycentric_table() * controls;
    const OrientedBoxVertices v = box_vertices(pose);
    for (int i = 0; i < kNumKeypoints; ++i) {
      EXPECT_LT((recon.row(i).transpose() - v.points[i]).norm(), 1e-12);
    }
  }
}

TEST(DesignMatrix, AnnihilatesTrueControlPoints) {
  const CameraIntrinsics k = default_camera();
  Rng rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    const BoxPose pose = random_pose(rng);
    const KeypointSet2D kp = project_box(k, pose);
    const DesignMatrix m = build_design_matrix(k, kp);

    Eigen::Matrix<double, 12, 1> x;
    x.segment<3>(0) = pose.translation;
    for (int axis = 0; axis < 3; ++axis) {
      x.segment<3>(3 * (axis + 1)) =
          pose.translation + 0.5 * pose.size[axis] * pose.rotation.col(axis);
    }
    EXPECT_LT((m * x).norm(), 1e-9 * x.norm());
  }
}

TEST(DesignMatrix, PrincipalPointKeypointsZeroOutDepthColumns) {
  const CameraIntrinsics k = default_camera();
  KeypointSet2D kp;
  for (auto& p : kp.points) p = Vec2(k.cx, k.cy);
  const DesignMatrix m = build_design_matrix(k, kp);
  for (int j = 0; j < 4; ++j) {
    EXPECT_DOUBLE_EQ(m.col(3 * j + 2).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Lift, RoundTripsNoiseFreePoses) {
  const CameraIntrinsics k = default_camera();
  Rng rng(47);
  for (int trial = 0; trial < 100; ++trial) {
    const BoxPose pose = random_pose(rng);
    const KeypointSet2D kp = project_box(k, pose);
    const LiftResult lr = lift(k, kp);

    EXPECT_LT(lr.reprojection_rms, 1e-6);
    EXPECT_GT(lr.spectral_gap, 1e6);
    EXPECT_NEAR(lr.vertices.points[0].z(), 1.0, 1e-12);

    const OrientedBoxVertices truth = box_vertices(pose);
    const double inv_depth = 1.0 / pose.translation.z();
    for (int i = 0; i < kNumKeypoints; ++i) {
      const Vec3 expect = inv_depth * truth.points[i];
      EXPECT_LT((lr.vertices.points[i] - expect).norm(),
                1e-6 * expect.norm());
    }
  }
}

TEST(Lift, ScaleEquivalentInputsGiveIdenticalResults) {
  const CameraIntrinsics k = default_camera();
  Rng rng(53);
  const BoxPose pose = random_pose(rng);
  BoxPose scaled = pose;
  scaled.translation *= 1.7;
  scaled.size *= 1.7;
  const LiftResult a = lift(k, project_box(k, pose));
  const LiftResult b = lift(k, project_box(k, scaled));
  for (int i = 0; i < kNumKeypoints; ++i) {
    EXPECT_LT((a.vertices.points[i] - b.vertices.points[i]).norm(), 1e-9);
  }
}

TEST(Lift, CollinearKeypointsThrow) {
  const CameraIntrinsics k = default_camera();
  KeypointSet2D kp;
  for (int i = 0; i < kNumKeypoints; ++i) {
    kp.points[i] = Vec2(100.0 + 20.0 * i, 120.0 + 10.0 * i);
  }
  EXPECT_THROW(lift(k, kp), AmbiguousLiftError);
}

TEST(Lift, ReprojectionGrowsLinearlyWithNoise) {
  const CameraIntrinsics k = default_camera();
  for (const double sigma : {0.5, 1.0, 2.0}) {
    Rng rng(59);
    double worst = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
      const BoxPose pose = random_pose(rng);
      KeypointSet2D kp = project_box(k, pose);
      for (auto& p : kp.points) {
        p += sigma * Vec2(rng.normal(), rng.normal());
      }
      LiftResult lr;
      try {
        lr = lift(k, kp);
      } catch (const AmbiguousLiftError&) {
        continue;  // heavy noise may collapse a distant pose; not under test
      }
      worst = std::max(worst, lr.reprojection_rms);
    }
    EXPECT_LE(worst, 2.0 * sigma) << "sigma " << sigma;
  }
}

TEST(RescaleToCanonical, IdentityAndDoubling) {
  const CameraIntrinsics k = default_camera();
  Rng rng(61);
  const BoxPose pose = random_pose(rng);
  const LiftResult lr = lift(k, project_box(k, pose));

  const Vec3 current = recovered_size(lr.vertices);
  const OrientedBoxVertices same = rescale_to_canonical(lr.vertices, current);
  for (int i = 0; i < kNumKeypoints; ++i) {
    EXPECT_LT((same.points[i] - lr.vertices.points[i]).norm(), 1e-9);
  }

  const OrientedBoxVertices doubled =
      rescale_to_canonical(lr.vertices, 2.0 * current);
  for (int i = 0; i < kNumKeypoints; ++i) {
    EXPECT_LT((doubled.points[i] - 2.0 * lr.vertices.points[i]).norm(), 1e-9);
  }
}

TEST(RescaleToCanonical, ProjectionsUnchangedAndSizeMatched) {
  const CameraIntrinsics k = default_camera();
  Rng rng(67);
  for (int trial = 0; trial < 20; ++trial) {
    const BoxPose pose = random_pose(rng);
    const LiftResult lr = lift(k, project_box(k, pose));
    const Vec3 canonical(0.4, 0.7, 1.1);
    const OrientedBoxVertices scaled =
        rescale_to_canonical(lr.vertices, canonical);

    for (int i = 0; i < kNumKeypoints; ++i) {
      EXPECT_LT((project(k, scaled.points[i]) -
                 project(k, lr.vertices.points[i]))
                    .norm(),
                1e-9);
    }
    const PoseFit fit = fit_pose_from_vertices(scaled);
    EXPECT_NEAR(geometric_mean_size(fit.pose.size) /
                    geometric_mean_size(canonical),
                1.0, 1e-9);
  }
}

TEST(Lift, FullPipelineRecoversRotationAndTranslationDirection) {
  const CameraIntrinsics k = default_camera();
  Rng rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    const BoxPose pose = random_pose(rng);
    const LiftResult lr = lift(k, project_box(k, pose));
    const OrientedBoxVertices rescaled =
        rescale_to_canonical(lr.vertices, pose.size);
    const PoseFit fit = fit_pose_from_vertices(rescaled);

    EXPECT_LT(rotation_angle(fit.pose.rotation, pose.rotation), 1e-5);
    const double cos_dir = fit.pose.translation.normalized().dot(
        pose.translation.normalized());
    EXPECT_LT(std::acos(std::clamp(cos_dir, -1.0, 1.0)), 1e-6);
  }
}

}  // namespace
}  // namespace boxtrack
