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
#include <vector>

#include "boxtrack/box.hpp"
#include "boxtrack/common.hpp"

namespace boxtrack {

/// Intersection over union of two axis-aligned rectangles.
inline double iou2d_rect(const Rect& a, const Rect& b) {
  const double iw = std::min(a.max.x(), b.max.x()) -
                    std::max(a.min.x(), b.min.x());
  const double ih = std::min(a.max.y(), b.max.y()) -
                    std::max(a.min.y(), b.min.y());
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

namespace detail {

// Corner-bit index lists of the six box faces, ordered so each quad winds
// counterclockwise when seen from outside (outward normals).
inline constexpr std::array<std::array<int, 4>, 6> kFaceCorners = {{
    {1, 3, 7, 5},  // +x
    {0, 4, 6, 2},  // -x
    {2, 6, 7, 3},  // +y
    {0, 1, 5, 4},  // -y
    {4, 5, 7, 6},  // +z
    {0, 2, 3, 1},  // -z
}};

struct HalfSpace {
  Vec3 normal;   // outward unit normal
  double offset;  // inside: normal . x <= offset
};

using Polygon3 = std::vector<Vec3>;

inline std::array<HalfSpace, 6> box_half_spaces(const BoxPose& pose) {
  std::array<HalfSpace, 6> hs;
  for (int axis = 0; axis < 3; ++axis) {
    const Vec3 dir = pose.rotation.col(axis);
    const double half = 0.5 * pose.size[axis];
    hs[2 * axis] = {dir, dir.dot(pose.translation) + half};
    hs[2 * axis + 1] = {-dir, -dir.dot(pose.translation) + half};
  }
  return hs;
}

inline std::array<Polygon3, 6> box_faces(const BoxPose& pose) {
  const OrientedBoxVertices v = box_vertices(pose);
  std::array<Polygon3, 6> faces;
  for (int f = 0; f < 6; ++f) {
    faces[f].reserve(4);
    for (int corner : kFaceCorners[f]) {
      faces[f].push_back(v.points[corner + 1]);
    }
  }
  return faces;
}

// Sutherland-Hodgman clip of a convex polygon against one half-space.
// `slack` shifts the inside test: positive keeps boundary points, negative
// rejects them.
inline Polygon3 clip_polygon(const Polygon3& poly, const HalfSpace& hs,
                             double slack) {
  Polygon3 out;
  const std::size_t n = poly.size();
  if (n == 0) return out;
  out.reserve(n + 2);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& cur = poly[i];
    const Vec3& nxt = poly[(i + 1) % n];
    const double dc = hs.normal.dot(cur) - hs.offset;
    const double dn = hs.normal.dot(nxt) - hs.offset;
    const bool cur_in = dc <= slack;
    const bool nxt_in = dn <= slack;
    if (cur_in) out.push_back(cur);
    if (cur_in != nxt_in) {
      const double t = dc / (dc - dn);
      out.push_back(cur + t * (nxt - cur));
    }
  }
  return out;
}

inline void clip_faces_against(const std::array<Polygon3, 6>& faces,
                               const std::array<HalfSpace, 6>& half_spaces,
                               double slack, std::vector<Polygon3>* out) {
  for (const Polygon3& face : faces) {
    Polygon3 poly = face;
    for (const HalfSpace& hs : half_spaces) {
      poly = clip_polygon(poly, hs, slack);
      if (poly.size() < 3) {
        poly.clear();
        break;
      }
    }
    if (!poly.empty()) out->push_back(std::move(poly));
  }
}

// Signed volume enclosed by outward-oriented polygons via the divergence
// theorem. Coordinates are re-centered on the vertex centroid first, so
// leftover flat patches from degenerate contact configurations contribute
// nothing.
inline double polytope_volume(const std::vector<Polygon3>& boundary) {
  Vec3 centroid = Vec3::Zero();
  std::size_t count = 0;
  for (const Polygon3& poly : boundary) {
    for (const Vec3& p : poly) {
      centroid += p;
      ++count;
    }
  }
  if (count == 0) return 0.0;
  centroid /= static_cast<double>(count);

  double volume = 0.0;
  for (const Polygon3& poly : boundary) {
    const Vec3 a = poly[0] - centroid;
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
      const Vec3 b = poly[i] - centroid;
      const Vec3 c = poly[i + 1] - centroid;
      volume += a.dot(b.cross(c));
    }
  }
  return volume / 6.0;
}

}  // namespace detail

inline double box_volume(const BoxPose& pose) {
  return pose.size.x() * pose.size.y() * pose.size.z();
}

/// Exact intersection-over-union of two oriented boxes.
///
/// The intersection boundary is assembled from a's faces clipped against
/// b's half-spaces and b's faces clipped against a's, then integrated with
/// the divergence theorem. The b-side clip is strict so that coplanar
/// face regions are counted once.
inline double iou3d(const BoxPose& a, const BoxPose& b) {
  const double scale =
      std::max({a.size.maxCoeff(), b.size.maxCoeff(),
                (a.translation - b.translation).norm(), 1.0});
  const double eps = 1e-12 * scale;

  std::vector<detail::Polygon3> boundary;
  boundary.reserve(12);
  detail::clip_faces_against(detail::box_faces(a), detail::box_half_spaces(b),
                             +eps, &boundary);
  detail::clip_faces_against(detail::box_faces(b), detail::box_half_spaces(a),
                             -eps, &boundary);

  const double va = box_volume(a);
  const double vb = box_volume(b);
  double inter = detail::polytope_volume(boundary);
  inter = std::clamp(inter, 0.0, std::min(va, vb));
  const double uni = va + vb - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace boxtrack
