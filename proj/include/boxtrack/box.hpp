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

#include <Eigen/SVD>

#include <array>
#include <cmath>

#include "boxtrack/camera.hpp"
#include "boxtrack/common.hpp"

namespace boxtrack {

inline constexpr int kNumKeypoints = 9;

// Canonical keypoint order, shared by the detector, tracker and EPnP lift.
// Index 0 is the box center. For index i in 1..8 the corner bits b = i-1
// select the sign of each local half-axis: bit 0 -> x, bit 1 -> y,
// bit 2 -> z; a set bit means +size/2, a clear bit means -size/2.
inline constexpr std::array<std::array<double, 3>, 8> kCornerSigns = {{
    {-1.0, -1.0, -1.0},
    {+1.0, -1.0, -1.0},
    {-1.0, +1.0, -1.0},
    {+1.0, +1.0, -1.0},
    {-1.0, -1.0, +1.0},
    {+1.0, -1.0, +1.0},
    {-1.0, +1.0, +1.0},
    {+1.0, +1.0, +1.0},
}};

// Vertex-index pairs (minus corner, plus corner) that span the four box
// edges parallel to each local axis. Derived from the corner bit layout.
inline constexpr std::array<std::array<std::array<int, 2>, 4>, 3> kAxisEdges =
    {{
        {{{1, 2}, {3, 4}, {5, 6}, {7, 8}}},  // x
        {{{1, 3}, {2, 4}, {5, 7}, {6, 8}}},  // y
        {{{1, 5}, {2, 6}, {3, 7}, {4, 8}}},  // z
    }};

/// 9-DoF object state: orientation, camera-frame position of the box
/// center, and per-axis extents. Translation and size are in relative
/// units; the whole pipeline is defined up to one global scale.
struct BoxPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  Vec3 size = Vec3::Ones();

  bool is_valid(double tol = 1e-9) const {
    if (!((rotation.transpose() * rotation - Mat3::Identity())
              .cwiseAbs()
              .maxCoeff() < tol))
      return false;
    if (!(std::abs(rotation.determinant() - 1.0) < tol)) return false;
    if (!(size.minCoeff() > 0.0)) return false;
    return translation.z() > 0.0;
  }
};

/// The nine projected keypoints (center + 8 corners) in pixels, canonical
/// order.
struct KeypointSet2D {
  std::array<Vec2, kNumKeypoints> points;
};

/// The nine camera-frame box points, same index convention.
struct OrientedBoxVertices {
  std::array<Vec3, kNumKeypoints> points;
};

/// Axis-aligned pixel rectangle.
struct Rect {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();

  double width() const { return max.x() - min.x(); }
  double height() const { return max.y() - min.y(); }
  double area() const { return std::max(0.0, width()) * std::max(0.0, height()); }
};

inline Rect keypoint_extent(const KeypointSet2D& kp) {
  Rect r{kp.points[0], kp.points[0]};
  for (const Vec2& p : kp.points) {
    r.min = r.min.cwiseMin(p);
    r.max = r.max.cwiseMax(p);
  }
  return r;
}

/// Computes the nine box points in the camera frame. Point 0 is the center;
/// point i adds rotation * (signs(i) .* size/2).
inline OrientedBoxVertices box_vertices(const BoxPose& pose) {
  OrientedBoxVertices out;
  out.points[0] = pose.translation;
  for (int i = 1; i < kNumKeypoints; ++i) {
    const auto& s = kCornerSigns[i - 1];
    const Vec3 local(0.5 * s[0] * pose.size.x(), 0.5 * s[1] * pose.size.y(),
                     0.5 * s[2] * pose.size.z());
    out.points[i] = pose.translation + pose.rotation * local;
  }
  return out;
}

/// Projects all nine box points. Throws DomainError naming the first vertex
/// index with non-positive depth.
inline KeypointSet2D project_box(const CameraIntrinsics& k,
                                 const BoxPose& pose) {
  const OrientedBoxVertices verts = box_vertices(pose);
  KeypointSet2D out;
  for (int i = 0; i < kNumKeypoints; ++i) {
    if (!(verts.points[i].z() > 0.0)) {
      throw DomainError("project_box: vertex " + std::to_string(i) +
                        " behind camera");
    }
    out.points[i] = project(k, verts.points[i]);
  }
  return out;
}

namespace detail {

struct AxisEdgeStats {
  Vec3 mean_edge[3];     // mean of the 4 parallel edge vectors per axis
  double mean_length[3];  // mean of the 4 parallel edge lengths per axis
};

inline AxisEdgeStats axis_edge_stats(const OrientedBoxVertices& v) {
  AxisEdgeStats st;
  for (int axis = 0; axis < 3; ++axis) {
    Vec3 sum = Vec3::Zero();
    double len = 0.0;
    for (const auto& pair : kAxisEdges[axis]) {
      const Vec3 edge = v.points[pair[1]] - v.points[pair[0]];
      sum += edge;
      len += edge.norm();
    }
    st.mean_edge[axis] = 0.25 * sum;
    st.mean_length[axis] = 0.25 * len;
  }
  return st;
}

/// Closest rotation to M in Frobenius norm, with determinant correction.
inline Mat3 procrustes_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return r;
}

}  // namespace detail

struct PoseFit {
  BoxPose pose;
  double residual_rms = 0.0;  // RMS point distance to the fitted box
};

/// Recovers a BoxPose from nine box points: per-axis directions come from
/// the mean of the four parallel edges, sizes from the mean edge lengths,
/// the rotation from the orthogonal Procrustes projection of the direction
/// matrix, and the translation from point 0.
///
/// Throws EstimationError when any mean edge collapses below 1e-12.
inline PoseFit fit_pose_from_vertices(const OrientedBoxVertices& verts) {
  const detail::AxisEdgeStats st = detail::axis_edge_stats(verts);
  Mat3 directions;
  for (int axis = 0; axis < 3; ++axis) {
    const double norm = st.mean_edge[axis].norm();
    if (!(st.mean_length[axis] > 1e-12) || !(norm > 1e-12)) {
      throw EstimationError("fit_pose_from_vertices: degenerate vertex set");
    }
    directions.col(axis) = st.mean_edge[axis] / norm;
  }

  PoseFit fit;
  fit.pose.rotation = detail::procrustes_rotation(directions);
  fit.pose.translation = verts.points[0];
  fit.pose.size =
      Vec3(st.mean_length[0], st.mean_length[1], st.mean_length[2]);

  const OrientedBoxVertices model = box_vertices(fit.pose);
  double sum_sq = 0.0;
  for (int i = 0; i < kNumKeypoints; ++i) {
    sum_sq += (verts.points[i] - model.points[i]).squaredNorm();
  }
  fit.residual_rms = std::sqrt(sum_sq / kNumKeypoints);
  return fit;
}

}  // namespace boxtrack
