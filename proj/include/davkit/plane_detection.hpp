// Copyright 2026 The davkit Authors.
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

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "davkit/geometry.hpp"

namespace dav {

/// Sequential RANSAC settings. Defaults reproduce the published recipe:
/// 1 cm threshold, 100 trials, at most five planes, each covering at least
/// 7% of the image.
struct RansacConfig {
  double inlier_threshold = 0.01;
  int max_iterations = 100;
  int max_planes = 5;
  double min_coverage = 0.07;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DetectedPlane {
  Plane plane;
  std::vector<int> inlier_pixels;  // ascending pixel indices
  double coverage = 0.0;           // inliers / image pixel count

  std::size_t inlier_count() const { return inlier_pixels.size(); }
};

/// Best plane over `cfg.max_iterations` non-degenerate three-point samples,
/// refit by total least squares on its inliers and recounted once. Ties keep
/// the earliest trial.
DetectedPlane ransac_single(std::span<const PixelPoint> points, std::size_t image_pixel_count,
                            const RansacConfig& cfg, std::mt19937_64& rng);

/// Greedy extraction: fit, remove inliers, repeat until `max_planes` planes
/// are found or the next candidate covers less than `min_coverage`. Output is
/// sorted by descending inlier count and depends only on the inputs and
/// `cfg.seed`.
std::vector<DetectedPlane> extract_planes(std::span<const PixelPoint> points, std::size_t image_pixel_count,
                                          const RansacConfig& cfg);

}  // namespace dav
