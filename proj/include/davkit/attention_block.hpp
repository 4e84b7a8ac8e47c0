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

#include <cmath>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "davkit/errors.hpp"

namespace dav {

/// Spatial activations flattened to an (h*w) x channels matrix; row
/// `row * w + col` holds one pixel.
template <typename Scalar>
struct FeatureMap {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  int h = 0;
  int w = 0;
  Matrix data;

  FeatureMap() = default;
  FeatureMap(int h_, int w_, Matrix data_) : h(h_), w(w_), data(std::move(data_)) {
    if (data.rows() != static_cast<Eigen::Index>(h) * w)
      throw ConfigurationError("feature map rows do not match its spatial size");
  }

  int positions() const { return h * w; }
  int channels() const { return static_cast<int>(data.cols()); }
};

/// Channel widths of the block. The published network uses 1024 embedding
/// and 256 orange channels on 29x38 features; the defaults here are toy
/// sized.
struct BlockConfig {
  int c_in = 16;
  int c_embed = 32;
  int c_orange = 8;
  double eps_bn = 1e-5;
  /// Divide the DAV logits by sqrt(c_embed).
  bool scale_logits = true;

  void validate() const {
    if (c_in < 1 || c_embed < 1 || c_orange < 1) throw ConfigurationError("channel counts must be >= 1");
    if (!(eps_bn >= 0.0)) throw ConfigurationError("normalization epsilon must be non-negative");
  }
};

template <typename Scalar>
struct Conv1x1 {
  using Weight = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Weight weight;  // out x in
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> bias;

  static Conv1x1 zeros(int in, int out) { return {Weight::Zero(out, in), Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(out)}; }
};

template <typename Scalar>
struct Normalization {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> scale;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> shift;

  static Normalization identity(int channels) {
    return {Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Ones(channels),
            Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(channels)};
  }
};

/// One of the two DAV embeddings (green or blue).
template <typename Scalar>
struct EmbeddingBranch {
  Conv1x1<Scalar> embed;  // c_in -> c_embed
  Normalization<Scalar> norm;
  Conv1x1<Scalar> gamma;  // c_embed -> c_embed, modulates the other branch
  Conv1x1<Scalar> beta;   // c_embed -> c_embed
  Conv1x1<Scalar> post;   // after ReLU
};

template <typename Scalar>
struct BlockParams {
  EmbeddingBranch<Scalar> green;
  EmbeddingBranch<Scalar> blue;
  Conv1x1<Scalar> orange;  // c_in -> c_orange
  Conv1x1<Scalar> out;     // c_orange -> c_in
  Normalization<Scalar> out_norm;

  static BlockParams zeros(const BlockConfig& cfg) {
    auto branch = [&] {
      return EmbeddingBranch<Scalar>{Conv1x1<Scalar>::zeros(cfg.c_in, cfg.c_embed),
                                     {Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(cfg.c_embed),
                                      Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(cfg.c_embed)},
                                     Conv1x1<Scalar>::zeros(cfg.c_embed, cfg.c_embed),
                                     Conv1x1<Scalar>::zeros(cfg.c_embed, cfg.c_embed),
                                     Conv1x1<Scalar>::zeros(cfg.c_embed, cfg.c_embed)};
    };
    return {branch(),
            branch(),
            Conv1x1<Scalar>::zeros(cfg.c_in, cfg.c_orange),
            Conv1x1<Scalar>::zeros(cfg.c_orange, cfg.c_in),
            {Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(cfg.c_in),
             Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(cfg.c_in)}};
  }
};

/// Visits every tensor in serialization order as (name, data, size). The
/// order is green {embed, norm, gamma, beta, post}, blue {same}, orange, out,
/// out_norm; a conv yields its weight (row-major) then its bias.
template <typename Scalar, typename Fn>
void for_each_tensor(BlockParams<Scalar>& params, Fn&& fn) {
  auto conv = [&](const std::string& name, Conv1x1<Scalar>& c) {
    fn(std::string_view(name + ".weight"), c.weight.data(), c.weight.size());
    fn(std::string_view(name + ".bias"), c.bias.data(), c.bias.size());
  };
  auto norm = [&](const std::string& name, Normalization<Scalar>& n) {
    fn(std::string_view(name + ".scale"), n.scale.data(), n.scale.size());
    fn(std::string_view(name + ".shift"), n.shift.data(), n.shift.size());
  };
  auto branch = [&](const std::string& name, EmbeddingBranch<Scalar>& b) {
    conv(name + ".embed", b.embed);
    norm(name + ".norm", b.norm);
    conv(name + ".gamma", b.gamma);
    conv(name + ".beta", b.beta);
    conv(name + ".post", b.post);
  };
  branch("green", params.green);
  branch("blue", params.blue);
  conv("orange", params.orange);
  conv("out", params.out);
  norm("out_norm", params.out_norm);
}

/// All parameters concatenated in serialization order.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> flatten(BlockParams<Scalar> params) {
  std::vector<Scalar> flat;
  for_each_tensor(params, [&](std::string_view, Scalar* data, Eigen::Index n) { flat.insert(flat.end(), data, data + n); });
  return Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(flat.data(), static_cast<Eigen::Index>(flat.size()));
}

/// Inverse of flatten; `params` supplies the shapes.
template <typename Scalar>
void unflatten(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& flat, BlockParams<Scalar>& params) {
  Eigen::Index k = 0;
  for_each_tensor(params, [&](std::string_view, Scalar* data, Eigen::Index n) {
    if (k + n > flat.size()) throw ConfigurationError("flat parameter vector is too short");
    for (Eigen::Index i = 0; i < n; ++i) data[i] = flat(k++);
  });
  if (k != flat.size()) throw ConfigurationError("flat parameter vector is too long");
}

/// Parameter count over all tensors.
template <typename Scalar>
Eigen::Index parameter_count(BlockParams<Scalar> params) {
  Eigen::Index total = 0;
  for_each_tensor(params, [&](std::string_view, Scalar*, Eigen::Index n) { total += n; });
  return total;
}

/// Element-wise conversion to another scalar type.
template <typename To, typename From>
BlockParams<To> cast_params(BlockParams<From> params, const BlockConfig& cfg) {
  std::vector<From> flat;
  for_each_tensor(params, [&](std::string_view, From* data, Eigen::Index n) { flat.insert(flat.end(), data, data + n); });
  BlockParams<To> out = BlockParams<To>::zeros(cfg);
  std::size_t k = 0;
  for_each_tensor(out, [&](std::string_view, To* data, Eigen::Index n) {
    if (k + static_cast<std::size_t>(n) > flat.size()) throw ConfigurationError("parameter shapes do not match config");
    for (Eigen::Index i = 0; i < n; ++i) data[i] = static_cast<To>(flat[k++]);
  });
  if (k != flat.size()) throw ConfigurationError("parameter shapes do not match config");
  return out;
}

template <typename Scalar>
struct GradientBundle {
  BlockParams<Scalar> params;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> input;
};

namespace block_detail {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct NormCache {
  Matrix<Scalar> normalized;  // x_hat
  Vector<Scalar> inv_std;
};

template <typename Scalar>
Matrix<Scalar> sigmoid(const Matrix<Scalar>& z) {
  return z.unaryExpr([](Scalar v) { return Scalar(1) / (Scalar(1) + std::exp(-v)); });
}

template <typename Scalar>
Matrix<Scalar> relu(const Matrix<Scalar>& z) {
  return z.cwiseMax(Scalar(0));
}

}  // namespace block_detail

/// Per-pixel affine map across channels: x * W^T + b.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> conv1x1(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x, const Conv1x1<Scalar>& conv) {
  if (conv.weight.cols() != x.cols())
    throw ConfigurationError("conv1x1 expects " + std::to_string(conv.weight.cols()) + " input channels, got " +
                             std::to_string(x.cols()));
  if (conv.bias.size() != conv.weight.rows()) throw ConfigurationError("conv1x1 bias length mismatch");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> y = x * conv.weight.transpose();
  y.rowwise() += conv.bias.transpose();
  return y;
}

template <typename Scalar>
FeatureMap<Scalar> conv1x1(const FeatureMap<Scalar>& x, const Conv1x1<Scalar>& conv) {
  return {x.h, x.w, conv1x1(x.data, conv)};
}

/// Single-instance normalization: statistics per channel over all positions
/// with biased variance.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> batch_norm(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x, const Normalization<Scalar>& norm, double eps,
    block_detail::NormCache<Scalar>* cache = nullptr) {
  using namespace block_detail;
  if (norm.scale.size() != x.cols() || norm.shift.size() != x.cols())
    throw ConfigurationError("normalization parameters do not match the channel count");
  const Scalar n = static_cast<Scalar>(x.rows());
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> mean = x.colwise().sum() / n;
  Matrix<Scalar> centered = x.rowwise() - mean;
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> var = centered.array().square().colwise().sum().matrix() / n;
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> inv_std =
      (var.array() + static_cast<Scalar>(eps)).rsqrt().matrix();
  Matrix<Scalar> normalized = centered.array().rowwise() * inv_std.array();
  Matrix<Scalar> y = normalized.array().rowwise() * norm.scale.transpose().array();
  y.rowwise() += norm.shift.transpose();
  if (cache) {
    cache->normalized = std::move(normalized);
    cache->inv_std = inv_std.transpose();
  }
  return y;
}

template <typename Scalar>
FeatureMap<Scalar> batch_norm(const FeatureMap<Scalar>& x, const Normalization<Scalar>& norm, double eps) {
  return {x.h, x.w, batch_norm(x.data, norm, eps)};
}

/// Every intermediate of one forward pass, kept for backward.
template <typename Scalar>
struct BlockForward {
  using Matrix = block_detail::Matrix<Scalar>;

  FeatureMap<Scalar> y;
  Matrix dav;  // (h*w) x (h*w), entries in (0, 1)

  Matrix green1, blue1;
  block_detail::NormCache<Scalar> green_norm, blue_norm;
  Matrix green_bn, blue_bn;
  Matrix green_gamma, green_beta, blue_gamma, blue_beta;
  Matrix green_denorm, blue_denorm;
  Matrix green2, blue2;
  Matrix orange;
  Matrix aggregated;
  Matrix out_conv;
  block_detail::NormCache<Scalar> out_norm;
  Scalar logit_scale = 1;
};

template <typename Scalar>
struct CrossDenormalized {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> green;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> blue;
};

namespace block_detail {

template <typename Scalar>
void cross_denormalize_into(const Matrix<Scalar>& green_in, const Matrix<Scalar>& blue_in,
                            const EmbeddingBranch<Scalar>& green, const EmbeddingBranch<Scalar>& blue, double eps,
                            BlockForward<Scalar>& f) {
  if (green_in.rows() != blue_in.rows() || green_in.cols() != blue_in.cols())
    throw ConfigurationError("green and blue embeddings differ in shape");
  f.green_bn = batch_norm(green_in, green.norm, eps, &f.green_norm);
  f.blue_bn = batch_norm(blue_in, blue.norm, eps, &f.blue_norm);
  f.green_gamma = conv1x1(green_in, green.gamma);
  f.green_beta = conv1x1(green_in, green.beta);
  f.blue_gamma = conv1x1(blue_in, blue.gamma);
  f.blue_beta = conv1x1(blue_in, blue.beta);
  // Each branch is modulated by the other's gamma/beta.
  f.green_denorm = f.green_bn.cwiseProduct(f.blue_gamma) + f.blue_beta;
  f.blue_denorm = f.blue_bn.cwiseProduct(f.green_gamma) + f.green_beta;
  f.green2 = conv1x1(relu(f.green_denorm), green.post);
  f.blue2 = conv1x1(relu(f.blue_denorm), blue.post);
}

}  // namespace block_detail

/// Cross-denormalization of two embeddings followed by ReLU and the post
/// convolutions.
template <typename Scalar>
CrossDenormalized<Scalar> cross_denormalize(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& green_in,
                                            const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& blue_in,
                                            const EmbeddingBranch<Scalar>& green,
                                            const EmbeddingBranch<Scalar>& blue, double eps) {
  BlockForward<Scalar> f;
  block_detail::cross_denormalize_into(green_in, blue_in, green, blue, eps, f);
  return {std::move(f.green2), std::move(f.blue2)};
}

/// Full forward pass. `dav_override`, when given, replaces the predicted
/// DAV in the aggregation (the returned `dav` is still the prediction).
template <typename Scalar>
BlockForward<Scalar> forward(const FeatureMap<Scalar>& x, const BlockParams<Scalar>& params, const BlockConfig& cfg,
                             const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>* dav_override = nullptr) {
  using namespace block_detail;
  cfg.validate();
  if (x.channels() != cfg.c_in)
    throw ConfigurationError("input has " + std::to_string(x.channels()) + " channels, block expects " +
                             std::to_string(cfg.c_in));
  BlockForward<Scalar> f;
  f.green1 = conv1x1(x.data, params.green.embed);
  f.blue1 = conv1x1(x.data, params.blue.embed);
  cross_denormalize_into(f.green1, f.blue1, params.green, params.blue, cfg.eps_bn, f);

  f.logit_scale = cfg.scale_logits ? Scalar(1) / std::sqrt(static_cast<Scalar>(cfg.c_embed)) : Scalar(1);
  f.dav = sigmoid<Scalar>((f.green2 * f.blue2.transpose()) * f.logit_scale);

  f.orange = conv1x1(x.data, params.orange);
  if (dav_override) {
    if (dav_override->rows() != f.dav.rows() || dav_override->cols() != f.dav.cols())
      throw ConfigurationError("DAV override has the wrong shape");
    f.aggregated = (*dav_override) * f.orange;
  } else {
    f.aggregated = f.dav * f.orange;
  }
  f.out_conv = conv1x1(f.aggregated, params.out);
  f.y = FeatureMap<Scalar>(x.h, x.w, x.data + batch_norm(f.out_conv, params.out_norm, cfg.eps_bn, &f.out_norm));
  return f;
}

/// Predicted DAV alone: sigmoid(green2 * blue2^T * scale).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> predict_dav(const FeatureMap<Scalar>& x,
                                                                  const BlockParams<Scalar>& params,
                                                                  const BlockConfig& cfg) {
  return forward(x, params, cfg).dav;
}

namespace block_detail {

template <typename Scalar>
Matrix<Scalar> norm_backward(const Matrix<Scalar>& dy, const NormCache<Scalar>& cache,
                             const Normalization<Scalar>& norm, Normalization<Scalar>& grad) {
  const Scalar n = static_cast<Scalar>(dy.rows());
  grad.scale += dy.cwiseProduct(cache.normalized).colwise().sum().transpose();
  grad.shift += dy.colwise().sum().transpose();
  const Matrix<Scalar> dxhat = dy.array().rowwise() * norm.scale.transpose().array();
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> sum_dxhat = dxhat.colwise().sum();
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> sum_dxhat_xhat = dxhat.cwiseProduct(cache.normalized).colwise().sum();
  Matrix<Scalar> dx = (dxhat * n).rowwise() - sum_dxhat;
  dx -= (cache.normalized.array().rowwise() * sum_dxhat_xhat.array()).matrix();
  dx = dx.array().rowwise() * (cache.inv_std.transpose().array() / n);
  return dx;
}

// Accumulates the conv parameter gradients and returns d(input).
template <typename Scalar>
Matrix<Scalar> conv_backward(const Matrix<Scalar>& dy, const Matrix<Scalar>& input, const Conv1x1<Scalar>& conv,
                             Conv1x1<Scalar>& grad) {
  grad.weight.noalias() += dy.transpose() * input;
  grad.bias += dy.colwise().sum().transpose();
  return dy * conv.weight;
}

}  // namespace block_detail

/// Reverse-mode gradients of a scalar loss given its gradients wrt the
/// block output `y` and the predicted DAV.
template <typename Scalar>
GradientBundle<Scalar> backward(const FeatureMap<Scalar>& x, const BlockParams<Scalar>& params,
                                const BlockConfig& cfg, const BlockForward<Scalar>& f,
                                const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& grad_y,
                                const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& grad_dav) {
  using namespace block_detail;
  if (grad_y.rows() != x.data.rows() || grad_y.cols() != x.data.cols())
    throw ConfigurationError("upstream gradient wrt y has the wrong shape");
  if (grad_dav.rows() != f.dav.rows() || grad_dav.cols() != f.dav.cols())
    throw ConfigurationError("upstream gradient wrt the DAV has the wrong shape");

  GradientBundle<Scalar> g{BlockParams<Scalar>::zeros(cfg), grad_y};  // residual path

  const Matrix<Scalar> d_out_conv = norm_backward(grad_y, f.out_norm, params.out_norm, g.params.out_norm);
  const Matrix<Scalar> d_aggregated = conv_backward(d_out_conv, f.aggregated, params.out, g.params.out);

  const Matrix<Scalar> d_dav = grad_dav + d_aggregated * f.orange.transpose();
  const Matrix<Scalar> d_orange = f.dav.transpose() * d_aggregated;
  g.input += conv_backward(d_orange, x.data, params.orange, g.params.orange);

  const Matrix<Scalar> d_logits =
      (d_dav.array() * f.dav.array() * (Scalar(1) - f.dav.array())).matrix() * f.logit_scale;
  const Matrix<Scalar> d_green2 = d_logits * f.blue2;
  const Matrix<Scalar> d_blue2 = d_logits.transpose() * f.green2;

  auto relu_backward = [](const Matrix<Scalar>& dy, const Matrix<Scalar>& pre) {
    return Matrix<Scalar>(dy.array() * (pre.array() > Scalar(0)).template cast<Scalar>());
  };
  const Matrix<Scalar> d_green_denorm =
      relu_backward(conv_backward(d_green2, relu(f.green_denorm), params.green.post, g.params.green.post),
                    f.green_denorm);
  const Matrix<Scalar> d_blue_denorm =
      relu_backward(conv_backward(d_blue2, relu(f.blue_denorm), params.blue.post, g.params.blue.post),
                    f.blue_denorm);

  // green_denorm = green_bn * blue_gamma + blue_beta, and symmetrically.
  const Matrix<Scalar> d_green_bn = d_green_denorm.cwiseProduct(f.blue_gamma);
  const Matrix<Scalar> d_blue_gamma = d_green_denorm.cwiseProduct(f.green_bn);
  const Matrix<Scalar>& d_blue_beta = d_green_denorm;
  const Matrix<Scalar> d_blue_bn = d_blue_denorm.cwiseProduct(f.green_gamma);
  const Matrix<Scalar> d_green_gamma = d_blue_denorm.cwiseProduct(f.blue_bn);
  const Matrix<Scalar>& d_green_beta = d_blue_denorm;

  Matrix<Scalar> d_green1 = norm_backward(d_green_bn, f.green_norm, params.green.norm, g.params.green.norm);
  d_green1 += conv_backward(d_green_gamma, f.green1, params.green.gamma, g.params.green.gamma);
  d_green1 += conv_backward(d_green_beta, f.green1, params.green.beta, g.params.green.beta);
  Matrix<Scalar> d_blue1 = norm_backward(d_blue_bn, f.blue_norm, params.blue.norm, g.params.blue.norm);
  d_blue1 += conv_backward(d_blue_gamma, f.blue1, params.blue.gamma, g.params.blue.gamma);
  d_blue1 += conv_backward(d_blue_beta, f.blue1, params.blue.beta, g.params.blue.beta);

  g.input += conv_backward(d_green1, x.data, params.green.embed, g.params.green.embed);
  g.input += conv_backward(d_blue1, x.data, params.blue.embed, g.params.blue.embed);
  return g;
}

/// Convenience overload that reruns the forward pass.
template <typename Scalar>
GradientBundle<Scalar> backward(const FeatureMap<Scalar>& x, const BlockParams<Scalar>& params,
                                const BlockConfig& cfg,
                                const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& grad_y,
                                const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& grad_dav) {
  return backward(x, params, cfg, forward(x, params, cfg), grad_y, grad_dav);
}

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) convolutions, identity
/// normalizations. With `zero_output` the output convolution starts at zero
/// so the block is initially the identity on its input.
template <typename Scalar>
BlockParams<Scalar> init_params(const BlockConfig& cfg, std::mt19937_64& rng, bool zero_output = true) {
  cfg.validate();
  auto conv = [&](int in, int out) {
    std::uniform_real_distribution<double> dist(-1.0 / std::sqrt(double(in)), 1.0 / std::sqrt(double(in)));
    Conv1x1<Scalar> c = Conv1x1<Scalar>::zeros(in, out);
    // Fill in row-major order so the draw sequence is independent of storage.
    for (int r = 0; r < out; ++r)
      for (int k = 0; k < in; ++k) c.weight(r, k) = static_cast<Scalar>(dist(rng));
    for (int r = 0; r < out; ++r) c.bias(r) = static_cast<Scalar>(dist(rng));
    return c;
  };
  auto branch = [&] {
    EmbeddingBranch<Scalar> b;
    b.embed = conv(cfg.c_in, cfg.c_embed);
    b.norm = Normalization<Scalar>::identity(cfg.c_embed);
    b.gamma = conv(cfg.c_embed, cfg.c_embed);
    b.beta = conv(cfg.c_embed, cfg.c_embed);
    b.post = conv(cfg.c_embed, cfg.c_embed);
    return b;
  };
  BlockParams<Scalar> p;
  p.green = branch();
  p.blue = branch();
  p.orange = conv(cfg.c_in, cfg.c_orange);
  p.out = zero_output ? Conv1x1<Scalar>::zeros(cfg.c_orange, cfg.c_in) : conv(cfg.c_orange, cfg.c_in);
  p.out_norm = Normalization<Scalar>::identity(cfg.c_in);
  return p;
}

/// Standard-normal feature map of the given size (stand-in for encoder
/// output).
template <typename Scalar>
FeatureMap<Scalar> random_features(int h, int w, int channels, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> data(h * w, channels);
  for (int p = 0; p < h * w; ++p)
    for (int c = 0; c < channels; ++c) data(p, c) = static_cast<Scalar>(dist(rng));
  return {h, w, std::move(data)};
}

}  // namespace dav
