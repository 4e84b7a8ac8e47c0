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

#include "davkit/attention_block.hpp"
#include "davkit/geometry.hpp"
#include "davkit/losses.hpp"
#include "davkit/volume.hpp"

namespace dav {

struct ToyTrainConfig {
  BlockConfig block;
  DavConfig dav;
  LossWeights weights;
  int steps = 200;
  double learning_rate = 3.0;
  std::uint64_t seed = 0;
};

struct ToyTrainResult {
  /// trace[k] is L_attention after k gradient steps (steps + 1 entries).
  std::vector<double> trace;
  BlockParams<double> params;
  Eigen::MatrixXd dav_gt;
};

/// Fits the DAV predictor of a freshly initialised block to the ground-truth
/// DAV of `scene` by plain gradient descent on L_attention, from a fixed
/// seeded random feature map. Throws DivergenceError on a non-finite loss.
ToyTrainResult toy_train(const DepthMap& scene, const ToyTrainConfig& cfg);

}  // namespace dav
