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

#include "davkit/synth.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Geometry>

#include "davkit/errors.hpp"

namespace dav {

namespace {

constexpr int kMaxAttempts = 1000;

// Orient so the camera centre lies on the positive side.
Plane facing_camera(Plane plane) { return plane.offset < 0.0 ? plane.flipped() : plane; }

Plane room_plane(int index, double back_depth, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto between = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  switch (index) {
    case 0:
      return facing_camera(Plane::through({0.0, 0.0, back_depth}, Eigen::Vector3d::UnitZ()));
    case 1:
      return facing_camera(Plane::through({0.0, between(0.8, 1.2), 0.0}, Eigen::Vector3d::UnitY()));
    case 2:
      return facing_camera(Plane::through({0.0, -between(0.8, 1.2), 0.0}, Eigen::Vector3d::UnitY()));
    case 3:
      return facing_camera(Plane::through({-between(1.2, 2.0), 0.0, 0.0}, Eigen::Vector3d::UnitX()));
    case 4:
      return facing_camera(Plane::through({between(1.2, 2.0), 0.0, 0.0}, Eigen::Vector3d::UnitX()));
    default: {
      // Panel facing the camera, tilted 20-50 degrees about a random in-plane
      // axis.
      const double axis_angle = between(0.0, 2.0 * std::numbers::pi);
      const double tilt = between(20.0, 50.0) * std::numbers::pi / 180.0;
      const Eigen::Vector3d axis(std::cos(axis_angle), std::sin(axis_angle), 0.0);
      const Eigen::Vector3d normal = Eigen::AngleAxisd(tilt, axis) * Eigen::Vector3d(0.0, 0.0, -1.0);
      const Point3 anchor(between(-0.8, 0.8), between(-0.6, 0.6), between(1.5, back_depth - 0.5));
      return facing_camera(Plane::through(anchor, normal));
    }
  }
}

}  // namespace

std::vector<double> LabeledScene::coverage() const {
  std::vector<double> out(spec.planes.size(), 0.0);
  for (Eigen::Index i = 0; i < labels.size(); ++i)
    if (labels.data()[i] >= 0) out[labels.data()[i]] += 1.0;
  for (double& c : out) c /= static_cast<double>(labels.size());
  return out;
}

CameraIntrinsics default_camera(int height, int width) {
  CameraIntrinsics k;
  k.width = width;
  k.height = height;
  k.fx = k.fy = 0.75 * width;
  k.cx = width / 2.0;
  k.cy = height / 2.0;
  k.validate();
  return k;
}

LabeledScene render(const SceneSpec& spec) {
  spec.camera.validate();
  if (spec.planes.empty()) throw ConfigurationError("scene has no planes");
  const auto& k = spec.camera;
  Eigen::ArrayXXd depth = Eigen::ArrayXXd::Zero(k.height, k.width);
  Eigen::ArrayXXi labels = Eigen::ArrayXXi::Constant(k.height, k.width, -1);
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      const Eigen::Vector3d ray((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
      double best = std::numeric_limits<double>::infinity();
      int label = -1;
      for (std::size_t i = 0; i < spec.planes.size(); ++i) {
        const double denom = spec.planes[i].normal.dot(ray);
        if (denom == 0.0) continue;
        const double z = -spec.planes[i].offset / denom;  // ray has unit z, so t == depth
        if (z > 0.0 && z < best) {
          best = z;
          label = static_cast<int>(i);
        }
      }
      if (label < 0 || best < spec.min_depth || best > spec.max_depth) continue;
      depth(v, u) = best;
      labels(v, u) = label;
    }
  }
  if ((labels >= 0).count() == 0) throw ConfigurationError("no pixel intersects any plane");

  if (spec.noise_sigma > 0.0) {
    std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    for (Eigen::Index i = 0; i < depth.size(); ++i)
      if (labels.data()[i] >= 0) depth.data()[i] = std::max(depth.data()[i] + noise(rng), spec.min_depth);
  }
  return {DepthMap(depth, labels >= 0), labels, spec};
}

SceneSpec make_room(std::uint64_t seed, int n_planes, const CameraIntrinsics& camera, double min_coverage) {
  if (n_planes < 1) throw ConfigurationError("a room needs at least one plane");
  camera.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> back(3.5, 5.0);

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    SceneSpec spec;
    spec.camera = camera;
    spec.seed = seed;
    const double back_depth = back(rng);
    for (int i = 0; i < n_planes; ++i) spec.planes.push_back(room_plane(i, back_depth, rng));

    const LabeledScene scene = render(spec);
    if (scene.depth.valid_count() != scene.depth.pixel_count()) continue;
    bool ok = true;
    for (double c : scene.coverage()) ok = ok && c >= min_coverage;
    if (ok) return spec;
  }
  throw GenerationError("could not place " + std::to_string(n_planes) + " planes with " +
                        std::to_string(min_coverage) + " coverage each after " + std::to_string(kMaxAttempts) +
                        " attempts");
}

}  // namespace dav
