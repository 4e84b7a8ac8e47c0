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

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "davkit/geometry.hpp"

namespace dav {

/// A camera at the origin (z forward, y down) looking at a set of infinite
/// planes in metric space. Earlier planes win exact depth ties.
struct SceneSpec {
  std::vector<Plane> planes;
  CameraIntrinsics camera;
  std::uint64_t seed = 0;
  double min_depth = 0.05;
  double max_depth = 20.0;
  /// Standard deviation of additive Gaussian depth noise (metres).
  double noise_sigma = 0.0;
};

struct LabeledScene {
  DepthMap depth;
  Eigen::ArrayXXi labels;  // plane index per pixel, -1 where invalid
  SceneSpec spec;

  /// Fraction of image pixels carrying each label.
  std::vector<double> coverage() const;
};

/// Ray-casts every pixel through the pinhole and keeps the nearest positive
/// intersection inside the depth bounds. Throws ConfigurationError if no
/// pixel hits anything.
LabeledScene render(const SceneSpec& spec);

/// Pseudo-random room: back wall, floor, ceiling, left wall, right wall, then
/// slanted panels, truncated to `n_planes`. Each plane is resampled until it
/// covers at least `min_coverage` of the image; throws GenerationError after
/// 1000 attempts.
SceneSpec make_room(std::uint64_t seed, int n_planes, const CameraIntrinsics& camera, double min_coverage = 0.07);

/// fx = fy = 0.75 * width, principal point at the image centre.
CameraIntrinsics default_camera(int height, int width);

}  // namespace dav
