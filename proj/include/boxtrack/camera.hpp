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

#include "boxtrack/common.hpp"

namespace boxtrack {

/// Pinhole camera. Image coordinates: u right, v down, origin at the top
/// left corner of the viewport.
struct CameraIntrinsics {
  double fx = 500.0;
  double fy = 500.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;

  bool is_valid() const {
    return fx > 0.0 && fy > 0.0 && width > 0 && height > 0;
  }

  Mat3 matrix() const {
    Mat3 k;
    k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
    return k;
  }

  bool contains(const Vec2& px) const {
    return px.x() >= 0.0 && px.x() < width && px.y() >= 0.0 &&
           px.y() < height;
  }
};

/// Projects a camera-frame point: u = fx*x/z + cx, v = fy*y/z + cy.
/// Throws DomainError for points at or behind the camera plane.
inline Vec2 project(const CameraIntrinsics& k, const Vec3& p) {
  if (!(p.z() > 0.0)) {
    throw DomainError("project: non-positive depth " + std::to_string(p.z()));
  }
  return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
}

}  // namespace boxtrack
