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

#include <cmath>

#include <gtest/gtest.h>

#include "davkit/errors.hpp"
#include "davkit/synth.hpp"

namespace {

using dav::Plane;

dav::SceneSpec spec_with(std::vector<Plane> planes, int h = 24, int w = 32) {
  dav::SceneSpec s;
  s.camera = dav::default_camera(h, w);
  s.planes = std::move(planes);
  return s;
}

TEST(Render, FrontoParallelPlaneIsConstant) {
  const auto scene = dav::render(spec_with({Plane::through({0, 0, 2}, Eigen::Vector3d::UnitZ())}));
  EXPECT_EQ(scene.depth.valid_count(), scene.depth.pixel_count());
  EXPECT_TRUE((scene.depth.values() == 2.0).all());
  EXPECT_TRUE((scene.labels == 0).all());
}

TEST(Render, FloorMatchesAnalyticDepth) {
  auto s = spec_with({Plane::through({0, 1.5, 0}, Eigen::Vector3d::UnitY())});
  const auto scene = dav::render(s);
  const auto& k = s.camera;
  for (int v = 0; v < k.height; ++v)
    for (int u = 0; u < k.width; ++u) {
      const double slope = (v - k.cy) / k.fy;
      const double z = slope > 0 ? 1.5 / slope : -1.0;
      if (z > 0 && z <= s.max_depth) {
        ASSERT_TRUE(scene.depth.is_valid(v, u));
        EXPECT_NEAR(scene.depth(v, u), z, 1e-12);
      } else {
        EXPECT_FALSE(scene.depth.is_valid(v, u));
        EXPECT_EQ(scene.labels(v, u), -1);
      }
    }
}

TEST(Render, NearerParallelPlaneOccludes) {
  const auto scene = dav::render(spec_with({Plane::through({0, 0, 2}, Eigen::Vector3d::UnitZ()),
                                            Plane::through({0, 0, 3}, Eigen::Vector3d::UnitZ())}));
  EXPECT_TRUE((scene.labels == 0).all());
  EXPECT_EQ(scene.coverage()[1], 0.0);
}

TEST(Render, Errors) {
  EXPECT_THROW(dav::render(spec_with({})), dav::ConfigurationError);
  // Plane behind the camera.
  EXPECT_THROW(dav::render(spec_with({Plane::through({0, 0, -2}, Eigen::Vector3d::UnitZ())})),
               dav::ConfigurationError);
  auto bad = spec_with({Plane::through({0, 0, 2}, Eigen::Vector3d::UnitZ())});
  bad.camera.fx = -1;
  EXPECT_THROW(dav::render(bad), dav::ConfigurationError);
}

TEST(Render, NoiseIsSeededAndBounded) {
  auto s = spec_with({Plane::through({0, 0, 2}, Eigen::Vector3d::UnitZ())});
  s.noise_sigma = 0.01;
  s.seed = 9;
  const auto a = dav::render(s), b = dav::render(s);
  EXPECT_TRUE((a.depth.values() == b.depth.values()).all());
  EXPECT_GT((a.depth.values() - 2.0).abs().maxCoeff(), 0.0);
  EXPECT_LT((a.depth.values() - 2.0).abs().maxCoeff(), 0.1);
}

TEST(Room, SinglePlaneIsBackWall) {
  const auto spec = dav::make_room(3, 1, dav::default_camera(24, 32));
  ASSERT_EQ(spec.planes.size(), 1u);
  EXPECT_NEAR(std::abs(spec.planes[0].normal.z()), 1.0, 1e-12);
  const auto scene = dav::render(spec);
  EXPECT_TRUE((scene.depth.values() == scene.depth.values()(0, 0)).all());
}

TEST(Room, Deterministic) {
  const auto k = dav::default_camera(24, 32);
  const auto a = dav::make_room(11, 4, k), b = dav::make_room(11, 4, k);
  ASSERT_EQ(a.planes.size(), b.planes.size());
  for (std::size_t i = 0; i < a.planes.size(); ++i) {
    EXPECT_EQ(a.planes[i].normal, b.planes[i].normal);
    EXPECT_EQ(a.planes[i].offset, b.planes[i].offset);
  }
  EXPECT_TRUE((dav::render(a).depth.values() == dav::render(b).depth.values()).all());
}

TEST(Room, CoverageRespected) {
  const auto scene = dav::render(dav::make_room(42, 3, dav::default_camera(48, 64)));
  for (double c : scene.coverage()) EXPECT_GE(c, 0.07);
  EXPECT_EQ(scene.depth.valid_count(), scene.depth.pixel_count());
}

class RoomSeeds : public ::testing::TestWithParam<int> {};

TEST_P(RoomSeeds, DepthsLieOnLabelledPlanes) {
  const auto k = dav::default_camera(32, 40);
  const auto scene = dav::render(dav::make_room(GetParam(), 2 + GetParam() % 5, k));
  for (int v = 0; v < k.height; ++v)
    for (int u = 0; u < k.width; ++u) {
      if (!scene.depth.is_valid(v, u)) continue;
      const double z = scene.depth(v, u);
      const dav::Point3 p((u - k.cx) / k.fx * z, (v - k.cy) / k.fy * z, z);
      EXPECT_NEAR(scene.spec.planes[scene.labels(v, u)].signed_distance(p), 0.0, 1e-6);
      // Camera centre on the positive side of every plane.
      EXPECT_GT(scene.spec.planes[scene.labels(v, u)].offset, 0.0);
    }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RoomSeeds, ::testing::Range(0, 12));

TEST(Room, Errors) {
  const auto k = dav::default_camera(16, 16);
  EXPECT_THROW(dav::make_room(1, 0, k), dav::ConfigurationError);
  EXPECT_THROW(dav::make_room(1, 3, k, 0.9), dav::GenerationError);
}

}  // namespace
