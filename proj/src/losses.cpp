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

#include "davkit/losses.hpp"

#include <cmath>

#include "davkit/errors.hpp"

namespace dav {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void check_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ConfigurationError(std::string(what) + ": shape mismatch");
}

Mask joint_mask(const DepthMap& pred, const DepthMap& gt) {
  if (pred.height() != gt.height() || pred.width() != gt.width())
    throw ConfigurationError("predicted and ground-truth depth maps differ in size");
  return pred.valid() && gt.valid();
}

// Adds one row's |1 - cos(p, a)| term to `value` and its gradient wrt p to
// `grad`. Returns false when p has zero norm.
template <typename Row, typename GradRow>
bool cosine_term(const Row& p, const Row& a, double& value, GradRow grad) {
  const double np = p.norm();
  const double na = a.norm();
  if (np == 0.0 || na == 0.0) {
    value += 1.0;
    return false;
  }
  const double cosine = p.dot(a) / (np * na);
  value += std::abs(1.0 - cosine);
  const double s = -sign(1.0 - cosine);
  grad += s * (a / (np * na) - cosine * p / (np * np));
  return true;
}

}  // namespace

void LossWeights::validate() const {
  if (!(lambda >= 0.0 && mu >= 0.0 && theta >= 0.0 && gamma >= 0.0))
    throw ConfigurationError("loss weights must be non-negative");
  if (!(alpha > 0.0)) throw ConfigurationError("alpha must be positive");
}

LossValue l_mae(const Eigen::MatrixXd& dav_pred, const Eigen::MatrixXd& dav_gt) {
  check_same_shape(dav_pred, dav_gt, "l_mae");
  const double n = static_cast<double>(dav_pred.size());
  if (n == 0) throw DegenerateInputError("l_mae on empty volumes");
  const Eigen::MatrixXd diff = dav_pred - dav_gt;
  LossValue out;
  out.value = diff.cwiseAbs().sum() / n;
  out.gradient = diff.unaryExpr([n](double d) { return sign(d) / n; });
  return out;
}

LossValue l_ang(const Eigen::MatrixXd& dav_pred, const Eigen::MatrixXd& dav_gt) {
  check_same_shape(dav_pred, dav_gt, "l_ang");
  if (dav_pred.rows() != dav_pred.cols()) throw ConfigurationError("l_ang expects a square volume");
  const Eigen::Index n = dav_pred.rows();
  if (n == 0) throw DegenerateInputError("l_ang on empty volumes");
  LossValue out;
  out.gradient = Eigen::MatrixXd::Zero(n, n);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!cosine_term(dav_pred.row(i), dav_gt.row(i), total, out.gradient.row(i))) out.warning = true;
  for (Eigen::Index j = 0; j < n; ++j)
    if (!cosine_term(dav_pred.col(j), dav_gt.col(j), total, out.gradient.col(j))) out.warning = true;
  out.value = total / static_cast<double>(n);
  out.gradient /= static_cast<double>(n);
  return out;
}

LossValue l_attention(const Eigen::MatrixXd& dav_pred, const Eigen::MatrixXd& dav_gt, const LossWeights& w) {
  w.validate();
  LossValue out = l_mae(dav_pred, dav_gt);
  if (w.lambda != 0.0) {
    const LossValue ang = l_ang(dav_pred, dav_gt);
    out.value += w.lambda * ang.value;
    out.gradient += w.lambda * ang.gradient;
    out.warning = ang.warning;
  }
  return out;
}

LossValue l_log(const DepthMap& d_pred, const DepthMap& d_gt, double alpha) {
  const Mask mask = joint_mask(d_pred, d_gt);
  const double m = static_cast<double>(mask.count());
  if (m == 0) throw DegenerateInputError("l_log: no pixel is valid in both maps");
  LossValue out;
  out.gradient = Eigen::MatrixXd::Zero(d_pred.height(), d_pred.width());
  double total = 0.0;
  for (int v = 0; v < d_pred.height(); ++v) {
    for (int u = 0; u < d_pred.width(); ++u) {
      if (!mask(v, u)) continue;
      const double e = d_pred(v, u) - d_gt(v, u);
      total += std::log(std::abs(e) + alpha);
      out.gradient(v, u) = sign(e) / (std::abs(e) + alpha) / m;
    }
  }
  out.value = total / m;
  return out;
}

LossValue l_grad(const DepthMap& d_pred, const DepthMap& d_gt, double alpha) {
  const Mask mask = joint_mask(d_pred, d_gt);
  const double m = static_cast<double>(mask.count());
  if (m == 0) throw DegenerateInputError("l_grad: no pixel is valid in both maps");
  const Eigen::ArrayXXd error = mask.select(d_pred.values() - d_gt.values(), 0.0);
  const SobelGradient g = sobel_gradient(error.abs());

  double total = 0.0;
  Eigen::ArrayXXd grad_dx = Eigen::ArrayXXd::Zero(error.rows(), error.cols());
  Eigen::ArrayXXd grad_dy = grad_dx;
  for (Eigen::Index i = 0; i < error.size(); ++i) {
    if (!mask.data()[i]) continue;
    const double gx = g.dx.data()[i];
    const double gy = g.dy.data()[i];
    total += std::log(std::abs(gx) + alpha) + std::log(std::abs(gy) + alpha);
    grad_dx.data()[i] = sign(gx) / (std::abs(gx) + alpha) / m;
    grad_dy.data()[i] = sign(gy) / (std::abs(gy) + alpha) / m;
  }
  const Eigen::ArrayXXd grad_abs = sobel_gradient_adjoint(grad_dx, grad_dy);
  LossValue out;
  out.value = total / m;
  out.gradient = (grad_abs * error.unaryExpr([](double e) { return sign(e); })).matrix();
  return out;
}

LossValue l_norm(const DepthMap& d_pred, const DepthMap& d_gt) {
  const Mask mask = joint_mask(d_pred, d_gt);
  const NormalMap pred_normals = sobel_normals(d_pred);
  const NormalMap gt_normals = sobel_normals(d_gt);
  const Mask used = mask && pred_normals.set && gt_normals.set;
  const double m = static_cast<double>(used.count());
  if (m == 0) throw DegenerateInputError("l_norm: no pixel has a normal in both maps");

  // Gradient flows back through n_pred = v / |v|, v = (-dx, -dy, 1).
  const SobelGradient g = sobel_gradient(d_pred.values());
  Eigen::ArrayXXd grad_dx = Eigen::ArrayXXd::Zero(d_pred.height(), d_pred.width());
  Eigen::ArrayXXd grad_dy = grad_dx;
  double total = 0.0;
  for (int v = 0; v < d_pred.height(); ++v) {
    for (int u = 0; u < d_pred.width(); ++u) {
      if (!used(v, u)) continue;
      const Eigen::Vector3d n_pred = pred_normals.at(v, u);
      const Eigen::Vector3d n_gt = gt_normals.at(v, u);
      // For unit vectors 1 - a.b == |a - b|^2 / 2, which is never negative
      // and vanishes exactly when the normals agree.
      const Eigen::Vector3d diff = n_pred - n_gt;
      total += 0.5 * diff.squaredNorm();
      const Eigen::Vector3d d_npred = diff / m;
      const Eigen::Vector3d raw(-g.dx(v, u), -g.dy(v, u), 1.0);
      const Eigen::Vector3d d_raw = (d_npred - n_pred * n_pred.dot(d_npred)) / raw.norm();
      grad_dx(v, u) = -d_raw.x();
      grad_dy(v, u) = -d_raw.y();
    }
  }
  LossValue out;
  out.value = total / m;
  out.gradient = sobel_gradient_adjoint(grad_dx, grad_dy).matrix();
  return out;
}

LossValue l_depth(const DepthMap& d_pred, const DepthMap& d_gt, const LossWeights& w) {
  w.validate();
  LossValue out = l_log(d_pred, d_gt, w.alpha);
  if (w.mu != 0.0) {
    const LossValue grad = l_grad(d_pred, d_gt, w.alpha);
    out.value += w.mu * grad.value;
    out.gradient += w.mu * grad.gradient;
  }
  if (w.theta != 0.0) {
    const LossValue norm = l_norm(d_pred, d_gt);
    out.value += w.theta * norm.value;
    out.gradient += w.theta * norm.gradient;
  }
  return out;
}

TotalLoss l_total(const Eigen::MatrixXd& dav_pred, const Eigen::MatrixXd& dav_gt, const DepthMap& d_pred,
                  const DepthMap& d_gt, const LossWeights& w) {
  const LossValue attention = l_attention(dav_pred, dav_gt, w);
  TotalLoss out;
  out.value = attention.value;
  out.dav_gradient = attention.gradient;
  out.warning = attention.warning;
  if (w.gamma != 0.0) {
    const LossValue depth = l_depth(d_pred, d_gt, w);
    out.value += w.gamma * depth.value;
    out.depth_gradient = w.gamma * depth.gradient;
  } else {
    out.depth_gradient = Eigen::MatrixXd::Zero(d_pred.height(), d_pred.width());
  }
  return out;
}

}  // namespace dav
