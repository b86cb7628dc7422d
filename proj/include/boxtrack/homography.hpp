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

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "boxtrack/common.hpp"
#include "boxtrack/rng.hpp"

namespace boxtrack {

/// A sparse point match between the previous and the current frame, pixels.
struct Correspondence {
  Vec2 prev = Vec2::Zero();
  Vec2 curr = Vec2::Zero();
};

/// Projective plane motion, prev -> curr. The matrix is kept at unit
/// Frobenius norm with the bottom-right entry non-negative so comparisons
/// are well defined.
struct Homography {
  Mat3 m = Mat3::Identity() / std::numbers::sqrt3;

  static Homography from_matrix(const Mat3& raw) {
    Homography h;
    const double norm = raw.norm();
    if (!(norm > 0.0)) {
      throw EstimationError("homography: zero matrix");
    }
    h.m = raw / norm;
    if (h.m(2, 2) < 0.0) h.m = -h.m;
    return h;
  }

  static Homography identity() { return from_matrix(Mat3::Identity()); }

  bool is_valid() const {
    return std::abs(m.norm() - 1.0) < 1e-12 &&
           std::abs(m.determinant()) > 1e-12;
  }
};

/// Projective action: homogenize, multiply, dehomogenize. Throws
/// DomainError when the point maps to infinity.
inline Vec2 apply(const Homography& h, const Vec2& p) {
  const Vec3 q = h.m * Vec3(p.x(), p.y(), 1.0);
  if (std::abs(q.z()) <= 1e-12) {
    throw DomainError("homography apply: point at infinity");
  }
  return {q.x() / q.z(), q.y() / q.z()};
}

/// compose(h_ab, h_bc) maps through h_bc first: the result sends frame-c
/// points to frame-a points via the matrix product.
inline Homography compose(const Homography& h_ab, const Homography& h_bc) {
  return Homography::from_matrix(h_ab.m * h_bc.m);
}

inline Homography inverse(const Homography& h) {
  return Homography::from_matrix(h.m.inverse());
}

namespace detail {

struct Normalization {
  Mat3 transform;  // translate centroid to origin, scale RMS radius to sqrt2
};

inline Normalization normalize_points(std::span<const Vec2> pts,
                                      std::vector<Vec2>* out) {
  Vec2 centroid = Vec2::Zero();
  for (const Vec2& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());

  double rms = 0.0;
  for (const Vec2& p : pts) rms += (p - centroid).squaredNorm();
  rms = std::sqrt(rms / static_cast<double>(pts.size()));
  const double scale = rms > 1e-12 ? std::numbers::sqrt2 / rms : 1.0;

  out->clear();
  out->reserve(pts.size());
  for (const Vec2& p : pts) out->push_back(scale * (p - centroid));

  Normalization n;
  n.transform << scale, 0.0, -scale * centroid.x(),
                 0.0, scale, -scale * centroid.y(),
                 0.0, 0.0, 1.0;
  return n;
}

// Minimal 4-point solver in normalized coordinates. Fixes h33 = 1 and
// solves the 8x8 linear system; returns false when the system is too close
// to singular to trust (collinear sources or a homography moving the
// normalized origin to infinity).
inline bool solve_four_point(const std::vector<Vec2>& src,
                             const std::vector<Vec2>& dst, Mat3* h) {
  Eigen::Matrix<double, 8, 8> a;
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    const double x = src[i].x(), y = src[i].y();
    const double u = dst[i].x(), v = dst[i].y();
    a.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
    a.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
    b(2 * i) = u;
    b(2 * i + 1) = v;
  }
  const Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
  if (!lu.isInvertible()) return false;
  const Eigen::Matrix<double, 8, 1> sol = lu.solve(b);
  *h << sol(0), sol(1), sol(2), sol(3), sol(4), sol(5), sol(6), sol(7), 1.0;
  return true;
}

}  // namespace detail

/// Hartley-normalized direct linear transform over all correspondences.
///
/// Each point set is translated to zero mean and scaled to RMS radius
/// sqrt(2); the 2n x 9 system is solved through the smallest eigenvector of
/// its normal matrix and the result denormalized. Throws EstimationError
/// when the configuration is degenerate (the two smallest singular values
/// both vanish relative to the largest).
inline Homography estimate_dlt(std::span<const Correspondence> corrs) {
  const std::size_t n = corrs.size();
  if (n < 4) {
    throw EstimationError("estimate_dlt: need at least 4 correspondences");
  }

  std::vector<Vec2> prev_raw(n), curr_raw(n);
  for (std::size_t i = 0; i < n; ++i) {
    prev_raw[i] = corrs[i].prev;
    curr_raw[i] = corrs[i].curr;
  }
  std::vector<Vec2> prev, curr;
  const detail::Normalization tp = detail::normalize_points(prev_raw, &prev);
  const detail::Normalization tc = detail::normalize_points(curr_raw, &curr);

  Eigen::MatrixXd a(2 * n, 9);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = prev[i].x(), y = prev[i].y();
    const double u = curr[i].x(), v = curr[i].y();
    a.row(2 * i) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
    a.row(2 * i + 1) << x, y, 1, 0, 0, 0, -u * x, -u * y, -u;
  }

  const Eigen::Matrix<double, 9, 9> normal = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 9, 9>> eig(normal);
  const auto& values = eig.eigenvalues();  // ascending eigenvalues = sigma^2
  const double sigma_largest = std::sqrt(std::max(values(8), 0.0));
  const double sigma_second = std::sqrt(std::max(values(1), 0.0));
  // A configuration is degenerate when the two smallest singular values both
  // vanish. Going through the normal matrix squares the conditioning, so a
  // true zero surfaces as roughly sqrt(eps) * sigma_max; 1e-7 sits above
  // that floor and far below any non-degenerate spectrum.
  if (!(sigma_second > 1e-7 * sigma_largest)) {
    throw EstimationError("estimate_dlt: degenerate configuration");
  }

  const Eigen::Matrix<double, 9, 1> hvec = eig.eigenvectors().col(0);
  Mat3 h_norm;
  h_norm << hvec(0), hvec(1), hvec(2), hvec(3), hvec(4), hvec(5), hvec(6),
      hvec(7), hvec(8);
  const Mat3 h = tc.transform.inverse() * h_norm * tp.transform;
  return Homography::from_matrix(h);
}

struct RansacConfig {
  double inlier_threshold = 2.0;  // pixels, symmetric transfer error
  int max_iterations = 500;
  int min_inliers = 8;
  std::uint64_t seed = 0;
  // Optional adaptive stop; sampling order is unchanged, the loop just ends
  // once the standard 99% confidence bound is met, so seeded results stay
  // reproducible for a fixed config.
  bool adaptive_exit = false;
};

struct RansacResult {
  Homography h;
  std::vector<bool> inliers;  // over the input order
  int inlier_count = 0;
};

/// Symmetric transfer error: the larger of the forward and backward
/// point-transfer distances.
inline double symmetric_transfer_error(const Homography& h,
                                       const Homography& h_inv,
                                       const Correspondence& c) {
  const Vec3 f = h.m * Vec3(c.prev.x(), c.prev.y(), 1.0);
  const Vec3 b = h_inv.m * Vec3(c.curr.x(), c.curr.y(), 1.0);
  if (std::abs(f.z()) <= 1e-12 || std::abs(b.z()) <= 1e-12) {
    return std::numeric_limits<double>::infinity();
  }
  const double ef = (Vec2(f.x() / f.z(), f.y() / f.z()) - c.curr).norm();
  const double eb = (Vec2(b.x() / b.z(), b.y() / b.z()) - c.prev).norm();
  return std::max(ef, eb);
}

/// Seeded RANSAC over a 4-point minimal solver.
///
/// Samples are drawn in a fixed order from Rng(cfg.seed) (four distinct
/// indices per iteration, duplicates redrawn) and every hypothesis is
/// scored against all correspondences. The best inlier set is refit with
/// the full DLT, then one local-optimization pass re-scores against the
/// refit model and refits again; the returned mask is the one the final
/// model was estimated from. Output is a pure function of (corrs order,
/// cfg). Throws TrackingLostError when the best support is below
/// cfg.min_inliers.
inline RansacResult estimate_ransac(std::span<const Correspondence> corrs,
                                    const RansacConfig& cfg) {
  const std::size_t n = corrs.size();
  if (n < static_cast<std::size_t>(cfg.min_inliers) || n < 4) {
    throw TrackingLostError("estimate_ransac: " + std::to_string(n) +
                            " correspondences, need " +
                            std::to_string(std::max(cfg.min_inliers, 4)));
  }

  Rng rng(cfg.seed);
  std::vector<Vec2> src(4), dst(4), src_norm, dst_norm;
  std::vector<bool> best_mask;
  int best_count = -1;
  double best_error_sum = 0.0;

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    std::size_t idx[4];
    for (int j = 0; j < 4; ++j) {
      bool fresh;
      do {
        idx[j] = rng.uniform_index(n);
        fresh = true;
        for (int k = 0; k < j; ++k) fresh = fresh && idx[k] != idx[j];
      } while (!fresh);
      src[j] = corrs[idx[j]].prev;
      dst[j] = corrs[idx[j]].curr;
    }

    const detail::Normalization tp = detail::normalize_points(src, &src_norm);
    const detail::Normalization tc = detail::normalize_points(dst, &dst_norm);
    Mat3 h_norm;
    if (!detail::solve_four_point(src_norm, dst_norm, &h_norm)) continue;

    Homography h;
    try {
      h = Homography::from_matrix(tc.transform.inverse() * h_norm *
                                  tp.transform);
    } catch (const EstimationError&) {
      continue;
    }
    if (std::abs(h.m.determinant()) <= 1e-12) continue;
    const Homography h_inv = inverse(h);

    int count = 0;
    double error_sum = 0.0;
    std::vector<bool> mask(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      const double err = symmetric_transfer_error(h, h_inv, corrs[i]);
      if (err < cfg.inlier_threshold) {
        mask[i] = true;
        ++count;
        error_sum += err;
      }
    }
    if (count > best_count ||
        (count == best_count && error_sum < best_error_sum)) {
      best_count = count;
      best_error_sum = error_sum;
      best_mask = std::move(mask);
    }

    if (cfg.adaptive_exit && best_count > 0) {
      const double inlier_ratio =
          static_cast<double>(best_count) / static_cast<double>(n);
      const double denom = std::log1p(-std::pow(inlier_ratio, 4));
      if (denom < 0.0 &&
          static_cast<double>(iter + 1) >= std::log(0.01) / denom) {
        break;
      }
    }
  }

  if (best_count < cfg.min_inliers) {
    throw TrackingLostError("estimate_ransac: best support " +
                            std::to_string(std::max(best_count, 0)) +
                            " below min_inliers " +
                            std::to_string(cfg.min_inliers));
  }

  RansacResult result;
  result.inliers = std::move(best_mask);
  std::vector<Correspondence> inlier_set;
  for (int pass = 0; pass < 2; ++pass) {
    inlier_set.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (result.inliers[i]) inlier_set.push_back(corrs[i]);
    }
    result.h = estimate_dlt(inlier_set);
    if (pass == 1) break;
    const Homography h_inv = inverse(result.h);
    std::vector<bool> rescored(n, false);
    int count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (symmetric_transfer_error(result.h, h_inv, corrs[i]) <
          cfg.inlier_threshold) {
        rescored[i] = true;
        ++count;
      }
    }
    if (count < 4 || rescored == result.inliers) break;
    result.inliers = std::move(rescored);
  }
  result.inlier_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    result.inlier_count += result.inliers[i] ? 1 : 0;
  }
  if (result.inlier_count < cfg.min_inliers) {
    throw TrackingLostError("estimate_ransac: refit support collapsed below " +
                            std::to_string(cfg.min_inliers));
  }
  return result;
}

}  // namespace boxtrack
