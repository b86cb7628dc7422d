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

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

#include "boxtrack/box.hpp"
#include "boxtrack/camera.hpp"
#include "boxtrack/common.hpp"

namespace boxtrack {

using BarycentricTable = Eigen::Matrix<double, kNumKeypoints, 4>;
using DesignMatrix = Eigen::Matrix<double, 2 * kNumKeypoints, 12>;

/// Generalized barycentric coefficients of the nine box keypoints with
/// respect to the control points C0 = center and Ck = C0 + k-th half-axis.
/// The box's affine structure forces the row for corner signs (sx, sy, sz)
/// to (1 - sx - sy - sz, sx, sy, sz); rows sum to 1.
inline const BarycentricTable& barycentric_table() {
  static const BarycentricTable table = [] {
    BarycentricTable t;
    t.row(0) << 1.0, 0.0, 0.0, 0.0;
    for (int i = 1; i < kNumKeypoints; ++i) {
      const auto& s = kCornerSigns[i - 1];
      t.row(i) << 1.0 - s[0] - s[1] - s[2], s[0], s[1], s[2];
    }
    return t;
  }();
  return table;
}

/// Builds the homogeneous EPnP system M x = 0 for the stacked camera-frame
/// control point coordinates x in R^12. Per keypoint i and control point j:
///   alpha_ij * fx * Cj_x + alpha_ij * (cx - u_i) * Cj_z = 0
///   alpha_ij * fy * Cj_y + alpha_ij * (cy - v_i) * Cj_z = 0
inline DesignMatrix build_design_matrix(const CameraIntrinsics& k,
                                        const KeypointSet2D& kp) {
  const BarycentricTable& alpha = barycentric_table();
  DesignMatrix m = DesignMatrix::Zero();
  for (int i = 0; i < kNumKeypoints; ++i) {
    const double u = kp.points[i].x();
    const double v = kp.points[i].y();
    for (int j = 0; j < 4; ++j) {
      const double a = alpha(i, j);
      m(2 * i, 3 * j) = a * k.fx;
      m(2 * i, 3 * j + 2) = a * (k.cx - u);
      m(2 * i + 1, 3 * j + 1) = a * k.fy;
      m(2 * i + 1, 3 * j + 2) = a * (k.cy - v);
    }
  }
  return m;
}

struct LiftResult {
  OrientedBoxVertices vertices;    // camera frame, center depth = 1
  double reprojection_rms = 0.0;   // pixels, against the input keypoints
  double spectral_gap = 1.0;       // second-smallest / smallest eigenvalue
};

inline constexpr double kSpectralGapThreshold = 10.0;

/// Lifts nine 2D keypoints to camera-frame box vertices, up to scale.
///
/// The smallest eigenvector of Mt M gives the control points (the scale
/// direction is the one unobservable degree of freedom); the sign is fixed
/// so the mean vertex depth is positive and the result is normalized to
/// center depth 1. Throws AmbiguousLiftError when the null space is not
/// well separated (spectral gap below 10) or the reconstruction places a
/// vertex at non-positive depth.
inline LiftResult lift(const CameraIntrinsics& k, const KeypointSet2D& kp) {
  const DesignMatrix m = build_design_matrix(k, kp);
  const Eigen::Matrix<double, 12, 12> normal = m.transpose() * m;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 12, 12>> eig(normal);
  const auto& values = eig.eigenvalues();  // ascending
  const double lambda0 = std::max(values(0), 0.0);
  const double lambda1 = std::max(values(1), 0.0);

  LiftResult result;
  if (lambda1 <= 0.0) {
    result.spectral_gap = 1.0;
  } else if (lambda0 <= 0.0) {
    result.spectral_gap = std::numeric_limits<double>::infinity();
  } else {
    result.spectral_gap = lambda1 / lambda0;
  }
  if (!(result.spectral_gap >= kSpectralGapThreshold)) {
    throw AmbiguousLiftError("lift: degenerate keypoints, spectral gap " +
                             std::to_string(result.spectral_gap));
  }

  const Eigen::Matrix<double, 12, 1> x = eig.eigenvectors().col(0);
  Eigen::Matrix<double, 4, 3> controls;
  for (int j = 0; j < 4; ++j) controls.row(j) = x.segment<3>(3 * j);

  const BarycentricTable& alpha = barycentric_table();
  Eigen::Matrix<double, kNumKeypoints, 3> verts = alpha * controls;

  // The center is the mean of the corners, so fixing the sign of the center
  // depth fixes the mean depth.
  double center_z = verts(0, 2);
  if (center_z < 0.0) {
    verts = -verts;
    center_z = -center_z;
  }
  if (!(center_z > 0.0)) {
    throw AmbiguousLiftError("lift: center depth vanished");
  }
  verts /= center_z;

  double sum_sq = 0.0;
  for (int i = 0; i < kNumKeypoints; ++i) {
    result.vertices.points[i] = verts.row(i);
    if (!(result.vertices.points[i].z() > 0.0)) {
      throw AmbiguousLiftError("lift: vertex " + std::to_string(i) +
                               " at non-positive depth");
    }
    const Vec2 reproj = project(k, result.vertices.points[i]);
    sum_sq += (reproj - kp.points[i]).squaredNorm();
  }
  result.reprojection_rms = std::sqrt(sum_sq / kNumKeypoints);
  return result;
}

inline double geometric_mean_size(const Vec3& size) {
  return std::cbrt(size.x() * size.y() * size.z());
}

/// Size vector implied by a vertex set: the per-axis mean edge lengths.
inline Vec3 recovered_size(const OrientedBoxVertices& verts) {
  const detail::AxisEdgeStats st = detail::axis_edge_stats(verts);
  for (double len : st.mean_length) {
    if (!(len > 1e-12)) {
      throw EstimationError("recovered_size: degenerate vertex set");
    }
  }
  return {st.mean_length[0], st.mean_length[1], st.mean_length[2]};
}

/// Rescales a lifted vertex set about the camera origin so its geometric
/// mean edge length matches that of canonical_size. Projections are
/// unchanged.
inline OrientedBoxVertices rescale_to_canonical(const OrientedBoxVertices& v,
                                                const Vec3& canonical_size) {
  const double gm_current = geometric_mean_size(recovered_size(v));
  const double gm_target = geometric_mean_size(canonical_size);
  if (!(gm_target > 0.0)) {
    throw EstimationError("rescale_to_canonical: non-positive canonical size");
  }
  const double scale = gm_target / gm_current;
  OrientedBoxVertices out;
  for (int i = 0; i < kNumKeypoints; ++i) out.points[i] = scale * v.points[i];
  return out;
}

}  // namespace boxtrack
