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

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace boxtrack {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Input outside the mathematical domain of an operation (point behind the
/// camera, projective point at infinity, centroid off the viewport).
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Estimation failed on degenerate data (collapsed vertex set, rank-deficient
/// linear system).
class EstimationError : public std::runtime_error {
 public:
  explicit EstimationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// The EPnP lift has no well-separated 1-dimensional null space.
class AmbiguousLiftError : public EstimationError {
 public:
  explicit AmbiguousLiftError(const std::string& msg) : EstimationError(msg) {}
};

/// Robust estimation could not reach the required inlier support.
class TrackingLostError : public std::runtime_error {
 public:
  explicit TrackingLostError(const std::string& msg)
      : std::runtime_error(msg) {}
};

/// A metric is undefined on the given input (empty ground truth, too few
/// overlapping frames).
class MetricError : public std::runtime_error {
 public:
  explicit MetricError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed configuration or document; carries the offending key.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

/// Process-wide log level, initialized from the BOXTRACK_LOG environment
/// variable (error|warn|info|debug).
inline LogLevel& log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("BOXTRACK_LOG");
    if (env == nullptr) return LogLevel::kWarn;
    const std::string v(env);
    if (v == "error") return LogLevel::kError;
    if (v == "info") return LogLevel::kInfo;
    if (v == "debug") return LogLevel::kDebug;
    return LogLevel::kWarn;
  }();
  return level;
}

inline void log_message(LogLevel level, const std::string& msg) {
  if (level > log_level()) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[boxtrack:%s] %s\n",
               names[static_cast<int>(level)], msg.c_str());
}

}  // namespace boxtrack
