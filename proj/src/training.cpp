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

#include "davkit/training.hpp"

#include <cmath>
#include <random>

#include "davkit/errors.hpp"

namespace dav {

ToyTrainResult toy_train(const DepthMap& scene, const ToyTrainConfig& cfg) {
  if (cfg.steps < 0) throw ConfigurationError("step count must be non-negative");
  if (!(cfg.learning_rate >= 0.0)) throw ConfigurationError("learning rate must be non-negative");
  cfg.block.validate();
  cfg.weights.validate();

  ToyTrainResult result;
  result.dav_gt = ground_truth_dav(scene, cfg.dav).volume.values;
  const int h = scene.height() / cfg.dav.factor;
  const int w = scene.width() / cfg.dav.factor;

  std::mt19937_64 rng(cfg.seed);
  const FeatureMap<double> x = random_features<double>(h, w, cfg.block.c_in, rng);
  result.params = init_params<double>(cfg.block, rng);
  const Eigen::MatrixXd zero_grad_y = Eigen::MatrixXd::Zero(x.positions(), x.channels());

  result.trace.reserve(cfg.steps + 1);
  for (int step = 0;; ++step) {
    const BlockForward<double> f = forward(x, result.params, cfg.block);
    const LossValue loss = l_attention(f.dav, result.dav_gt, cfg.weights);
    if (!std::isfinite(loss.value)) throw DivergenceError("attention loss is not finite", step);
    result.trace.push_back(loss.value);
    if (step == cfg.steps) break;

    const GradientBundle<double> g = backward(x, result.params, cfg.block, f, zero_grad_y, loss.gradient);
    unflatten<double>(flatten(result.params) - cfg.learning_rate * flatten(g.params), result.params);
  }
  return result;
}

}  // namespace dav
