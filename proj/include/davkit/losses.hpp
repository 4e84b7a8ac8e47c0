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

#include <Eigen/Core>

#include "davkit/geometry.hpp"

namespace dav {

/// Loss coefficients. The published training sets lambda = mu = theta =
/// gamma = 1 and alpha = 0.5. Zero weights are accepted so that every term
/// can be switched off; alpha must stay positive.
struct LossWeights {
  double lambda = 1.0;
  double mu = 1.0;
  double theta = 1.0;
  double gamma = 1.0;
  double alpha = 0.5;

  void validate() const;
};

/// A loss value and its gradient wrt the prediction argument (same shape).
struct LossValue {
  double value = 0.0;
  Eigen::MatrixXd gradient;
  /// Set when a predicted row or column had zero norm in l_ang.
  bool warning = false;
};

struct TotalLoss {
  double value = 0.0;
  Eigen::MatrixXd dav_gradient;
  Eigen::MatrixXd depth_gradient;
  bool warning = false;
};

// Attention terms over (HW) x (HW) volumes.
LossValue l_mae(const Eigen::MatrixXd& dav_pred, const Eigen::MatrixXd& dav_gt);
LossValue l_ang(const Eigen::MatrixXd& dav_pred, const Eigen::MatrixXd& dav_gt);
LossValue l_attention(const Eigen::MatrixXd& dav_pred, const Eigen::MatrixXd& dav_gt, const LossWeights& w);

// Depth terms. Pixels count when valid in both maps; the gradient is wrt
// the predicted depth values and vanishes elsewhere.
LossValue l_log(const DepthMap& d_pred, const DepthMap& d_gt, double alpha = 0.5);
/// log(|Sobel_x |e|| + alpha) + log(|Sobel_y |e|| + alpha) per pixel, with
/// e = pred - gt set to zero outside the shared mask.
LossValue l_grad(const DepthMap& d_pred, const DepthMap& d_gt, double alpha = 0.5);
/// |1 - n_pred . n_gt| over pixels where both Sobel normals exist.
LossValue l_norm(const DepthMap& d_pred, const DepthMap& d_gt);
LossValue l_depth(const DepthMap& d_pred, const DepthMap& d_gt, const LossWeights& w);

/// L_attention + gamma * L_depth with the two gradients kept apart.
TotalLoss l_total(const Eigen::MatrixXd& dav_pred, const Eigen::MatrixXd& dav_gt, const DepthMap& d_pred,
                  const DepthMap& d_gt, const LossWeights& w);

}  // namespace dav
