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

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "boxtrack/box.hpp"
#include "boxtrack/common.hpp"
#include "boxtrack/tracker.hpp"

namespace boxtrack {

struct Rgb {
  std::uint8_t r = 255, g = 255, b = 255;
};

/// Row-major RGB raster.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;

  Image(int w, int h, Rgb fill = Rgb{}) : width(w), height(h) {
    pixels.assign(static_cast<std::size_t>(w) * h, fill);
  }

  void set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    pixels[static_cast<std::size_t>(y) * width + x] = c;
  }
};

/// Binary PPM (P6), 8 bits per channel.
inline void write_ppm(const std::string& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size() * 3));
}

namespace detail {

// Box wireframe: corner-bit pairs differing in exactly one bit.
inline constexpr std::array<std::array<int, 2>, 12> kWireframeEdges = {{
    {0, 1}, {0, 2}, {1, 3}, {2, 3},  // bottom face
    {4, 5}, {4, 6}, {5, 7}, {6, 7},  // top face
    {0, 4}, {1, 5}, {2, 6}, {3, 7},  // verticals
}};

inline constexpr std::array<Rgb, 6> kTrackPalette = {{
    {204, 0, 0},
    {0, 102, 204},
    {0, 153, 51},
    {204, 102, 0},
    {102, 0, 204},
    {153, 153, 0},
}};

/// Integer Bresenham segment, clipped per pixel to the image bounds.
inline void draw_line(Image* img, const Vec2& a, const Vec2& b, Rgb color) {
  int x0 = static_cast<int>(std::lround(a.x()));
  int y0 = static_cast<int>(std::lround(a.y()));
  const int x1 = static_cast<int>(std::lround(b.x()));
  const int y1 = static_cast<int>(std::lround(b.y()));
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    img->set(x0, y0, color);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

inline void draw_dot(Image* img, const Vec2& p, Rgb color) {
  const int cx = static_cast<int>(std::lround(p.x()));
  const int cy = static_cast<int>(std::lround(p.y()));
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) img->set(cx + dx, cy + dy, color);
  }
}

}  // namespace detail

/// Draws the wireframes of every record of one frame over a white
/// background: twelve box edges plus a center dot per track, colored by
/// track id.
inline Image render_overlay(const CameraIntrinsics& k,
                            std::span<const PoseRecord> frame_records) {
  Image img(k.width, k.height, Rgb{255, 255, 255});
  for (const PoseRecord& rec : frame_records) {
    const Rgb color =
        detail::kTrackPalette[rec.id % detail::kTrackPalette.size()];
    for (const auto& [ca, cb] : detail::kWireframeEdges) {
      detail::draw_line(&img, rec.keypoints.points[ca + 1],
                        rec.keypoints.points[cb + 1], color);
    }
    detail::draw_dot(&img, rec.keypoints.points[0], color);
  }
  return img;
}

}  // namespace boxtrack
