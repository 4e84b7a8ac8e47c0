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

#include "davkit/plane_detection.hpp"

#include <algorithm>
#include <cmath>

#include "davkit/errors.hpp"

namespace dav {

namespace {

// Skipped degenerate draws do not count as trials, so the total number of
// draws is capped separately.
constexpr int kDrawsPerTrial = 100;

struct Candidate {
  Plane plane;
  std::vector<std::size_t> positions;  // indices into the point span
};

std::vector<std::size_t> count_inliers(std::span<const PixelPoint> points, const Plane& plane, double threshold) {
  std::vector<std::size_t> inliers;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (std::abs(plane.signed_distance(points[i].point)) <= threshold) inliers.push_back(i);
  return inliers;
}

Candidate ransac_candidate(std::span<const PixelPoint> points, const RansacConfig& cfg, std::mt19937_64& rng) {
  const std::size_t n = points.size();
  if (n < 3) throw DegenerateInputError("RANSAC needs at least 3 points, got " + std::to_string(n));

  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  std::uniform_int_distribution<std::size_t> second(0, n - 2);
  std::uniform_int_distribution<std::size_t> third(0, n - 3);

  Candidate best;
  std::size_t best_count = 0;
  bool have_best = false;
  int trials = 0;
  long draws = 0;
  const long max_draws = static_cast<long>(cfg.max_iterations) * kDrawsPerTrial;
  while (trials < cfg.max_iterations && draws < max_draws) {
    ++draws;
    // Three distinct indices: draw from shrinking ranges and skip past the
    // ones already taken.
    const std::size_t i = first(rng);
    std::size_t j = second(rng);
    if (j >= i) ++j;
    std::size_t k = third(rng);
    const std::size_t lo = std::min(i, j);
    const std::size_t hi = std::max(i, j);
    if (k >= lo) ++k;
    if (k >= hi) ++k;

    const auto plane = Plane::from_points(points[i].point, points[j].point, points[k].point);
    if (!plane) continue;
    ++trials;

    std::size_t count = 0;
    for (const auto& p : points)
      if (std::abs(plane->signed_distance(p.point)) <= cfg.inlier_threshold) ++count;
    if (!have_best || count > best_count) {
      best.plane = *plane;
      best_count = count;
      have_best = true;
    }
  }
  if (!have_best) throw DegenerateInputError("every sampled triple was collinear");

  best.positions = count_inliers(points, best.plane, cfg.inlier_threshold);
  if (best.positions.size() >= 3) {
    std::vector<Point3> inlier_points;
    inlier_points.reserve(best.positions.size());
    for (std::size_t i : best.positions) inlier_points.push_back(points[i].point);
    try {
      const Plane refit = fit_plane_lsq(inlier_points);
      best.plane = refit;
      best.positions = count_inliers(points, refit, cfg.inlier_threshold);
    } catch (const DegenerateInputError&) {
      // Collinear inlier set: keep the sampled plane.
    }
  }
  return best;
}

DetectedPlane to_detected(std::span<const PixelPoint> points, const Candidate& c, std::size_t image_pixel_count) {
  DetectedPlane out;
  out.plane = c.plane;
  out.inlier_pixels.reserve(c.positions.size());
  for (std::size_t i : c.positions) out.inlier_pixels.push_back(points[i].index);
  std::sort(out.inlier_pixels.begin(), out.inlier_pixels.end());
  out.coverage = image_pixel_count == 0 ? 0.0
                                        : static_cast<double>(out.inlier_pixels.size()) /
                                              static_cast<double>(image_pixel_count);
  return out;
}

}  // namespace

void RansacConfig::validate() const {
  if (!(inlier_threshold > 0.0)) throw ConfigurationError("inlier threshold must be positive");
  if (max_iterations < 1) throw ConfigurationError("RANSAC needs at least one iteration");
  if (max_planes < 0) throw ConfigurationError("max_planes must be non-negative");
  if (!(min_coverage >= 0.0 && min_coverage <= 1.0)) throw ConfigurationError("min_coverage must lie in [0, 1]");
}

DetectedPlane ransac_single(std::span<const PixelPoint> points, std::size_t image_pixel_count,
                            const RansacConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  return to_detected(points, ransac_candidate(points, cfg, rng), image_pixel_count);
}

std::vector<DetectedPlane> extract_planes(std::span<const PixelPoint> points, std::size_t image_pixel_count,
                                          const RansacConfig& cfg) {
  cfg.validate();
  std::vector<DetectedPlane> planes;
  if (cfg.max_planes == 0) return planes;

  std::mt19937_64 rng(cfg.seed);
  std::vector<PixelPoint> remaining(points.begin(), points.end());
  while (static_cast<int>(planes.size()) < cfg.max_planes) {
    Candidate candidate;
    try {
      candidate = ransac_candidate(remaining, cfg, rng);
    } catch (const DegenerateInputError&) {
      if (planes.empty()) throw;
      break;
    }
    DetectedPlane detected = to_detected(remaining, candidate, image_pixel_count);
    if (detected.coverage < cfg.min_coverage || detected.inlier_pixels.empty()) break;
    planes.push_back(std::move(detected));

    std::vector<PixelPoint> kept;
    kept.reserve(remaining.size() - candidate.positions.size());
    std::size_t next = 0;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      if (next < candidate.positions.size() && candidate.positions[next] == i) {
        ++next;
        continue;
      }
      kept.push_back(remaining[i]);
    }
    remaining = std::move(kept);
  }
  std::stable_sort(planes.begin(), planes.end(),
                   [](const DetectedPlane& a, const DetectedPlane& b) { return a.inlier_count() > b.inlier_count(); });
  return planes;
}

}  // namespace dav
