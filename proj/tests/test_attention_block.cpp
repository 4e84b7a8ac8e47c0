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
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "davkit/attention_block.hpp"
#include "davkit/errors.hpp"
#include "davkit/gradient_check.hpp"
#include "davkit/synth.hpp"
#include "davkit/training.hpp"

namespace {

using Mat = Eigen::MatrixXd;
using dav::BlockConfig;
using dav::BlockParams;
using dav::FeatureMap;

BlockConfig toy_config() { return {5, 6, 3, 1e-5, true}; }

// Random parameters with perturbed normalizations and a live output conv.
BlockParams<double> random_params(const BlockConfig& cfg, std::mt19937_64& rng) {
  BlockParams<double> p = dav::init_params<double>(cfg, rng, false);
  std::normal_distribution<double> n(0.0, 0.3);
  for (auto* norm : {&p.green.norm, &p.blue.norm, &p.out_norm})
    for (Eigen::Index i = 0; i < norm->scale.size(); ++i) {
      norm->scale(i) += n(rng);
      norm->shift(i) = n(rng);
    }
  return p;
}

Mat naive_conv(const Mat& x, const dav::Conv1x1<double>& c) {
  Mat y(x.rows(), c.weight.rows());
  for (Eigen::Index p = 0; p < x.rows(); ++p)
    for (Eigen::Index o = 0; o < c.weight.rows(); ++o) {
      double s = c.bias(o);
      for (Eigen::Index i = 0; i < x.cols(); ++i) s += c.weight(o, i) * x(p, i);
      y(p, o) = s;
    }
  return y;
}

Mat naive_norm(const Mat& x, const dav::Normalization<double>& nm, double eps) {
  Mat y(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    double mean = 0.0;
    for (Eigen::Index p = 0; p < x.rows(); ++p) mean += x(p, c);
    mean /= static_cast<double>(x.rows());
    double var = 0.0;
    for (Eigen::Index p = 0; p < x.rows(); ++p) var += (x(p, c) - mean) * (x(p, c) - mean);
    var /= static_cast<double>(x.rows());
    for (Eigen::Index p = 0; p < x.rows(); ++p) y(p, c) = (x(p, c) - mean) / std::sqrt(var + eps) * nm.scale(c) + nm.shift(c);
  }
  return y;
}

// Straight-line recomputation of the green/blue branches.
std::pair<Mat, Mat> naive_cross(const Mat& gi, const Mat& bi, const dav::EmbeddingBranch<double>& g,
                                const dav::EmbeddingBranch<double>& b, double eps) {
  const Mat gbn = naive_norm(gi, g.norm, eps), bbn = naive_norm(bi, b.norm, eps);
  const Mat gg = naive_conv(gi, g.gamma), gb = naive_conv(gi, g.beta);
  const Mat bg = naive_conv(bi, b.gamma), bb = naive_conv(bi, b.beta);
  Mat gd(gi.rows(), gi.cols()), bd(bi.rows(), bi.cols());
  for (Eigen::Index i = 0; i < gd.size(); ++i) {
    gd.data()[i] = std::max(0.0, gbn.data()[i] * bg.data()[i] + bb.data()[i]);
    bd.data()[i] = std::max(0.0, bbn.data()[i] * gg.data()[i] + gb.data()[i]);
  }
  return {naive_conv(gd, g.post), naive_conv(bd, b.post)};
}

TEST(Conv1x1, IdentityBiasAndOracle) {
  std::mt19937_64 rng(1);
  const auto x = dav::random_features<double>(2, 2, 3, rng);
  dav::Conv1x1<double> id{dav::Conv1x1<double>::Weight::Identity(3, 3), Eigen::VectorXd::Zero(3)};
  EXPECT_EQ(dav::conv1x1(x, id).data, x.data);
  dav::Conv1x1<double> bias = dav::Conv1x1<double>::zeros(3, 2);
  bias.bias << 0.25, -4.0;
  const Mat y = dav::conv1x1(x, bias).data;
  for (int p = 0; p < 4; ++p) {
    EXPECT_EQ(y(p, 0), 0.25);
    EXPECT_EQ(y(p, 1), -4.0);
  }
  dav::Conv1x1<double> r = dav::init_params<double>(toy_config(), rng).orange;
  const auto x5 = dav::random_features<double>(2, 2, 5, rng);
  EXPECT_LT((dav::conv1x1(x5.data, r) - naive_conv(x5.data, r)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(dav::conv1x1(x.data, r), dav::ConfigurationError);
}

TEST(BatchNorm, Examples) {
  const auto id = dav::Normalization<double>::identity(1);
  dav::Normalization<double> shifted{Eigen::VectorXd::Constant(1, 3.0), Eigen::VectorXd::Constant(1, 0.7)};
  const Mat constant = Mat::Constant(6, 1, 4.2);
  const Mat y0 = dav::batch_norm(constant, shifted, 1e-5);
  EXPECT_TRUE((y0.array() == 0.7).all());
  Mat two(2, 1);
  two << 1.0, 3.0;
  const Mat y1 = dav::batch_norm(two, id, 0.0);
  EXPECT_EQ(y1(0, 0), -1.0);
  EXPECT_EQ(y1(1, 0), 1.0);
  std::mt19937_64 rng(2);
  const auto x = dav::random_features<double>(4, 5, 3, rng);
  const Mat y = dav::batch_norm(x.data, dav::Normalization<double>::identity(3), 1e-5);
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(y.col(c).mean(), 0.0, 1e-9);
    EXPECT_NEAR(y.col(c).squaredNorm() / 20.0, 1.0, 1e-4);
  }
  EXPECT_LT((y - naive_norm(x.data, dav::Normalization<double>::identity(3), 1e-5)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CrossDenormalize, NeutralModulation) {
  const int c = 4;
  std::mt19937_64 rng(3);
  const Mat gi = dav::random_features<double>(3, 3, c, rng).data;
  const Mat bi = dav::random_features<double>(3, 3, c, rng).data;
  dav::EmbeddingBranch<double> green, blue;
  for (auto* b : {&green, &blue}) {
    b->norm = dav::Normalization<double>::identity(c);
    b->gamma = dav::Conv1x1<double>::zeros(c, c);
    b->gamma.bias.setOnes();
    b->beta = dav::Conv1x1<double>::zeros(c, c);
    b->post = {dav::Conv1x1<double>::Weight::Identity(c, c), Eigen::VectorXd::Zero(c)};
  }
  const auto out = dav::cross_denormalize(gi, bi, green, blue, 1e-5);
  const Mat expect = dav::batch_norm(gi, green.norm, 1e-5).cwiseMax(0.0);
  EXPECT_EQ(out.green, expect);
}

TEST(CrossDenormalize, SwapSymmetryAndOracle) {
  const BlockConfig cfg = toy_config();
  std::mt19937_64 rng(4);
  const auto p = random_params(cfg, rng);
  const Mat gi = dav::random_features<double>(2, 3, cfg.c_embed, rng).data;
  const Mat bi = dav::random_features<double>(2, 3, cfg.c_embed, rng).data;
  const auto ab = dav::cross_denormalize(gi, bi, p.green, p.blue, cfg.eps_bn);
  const auto ba = dav::cross_denormalize(bi, gi, p.blue, p.green, cfg.eps_bn);
  EXPECT_EQ(ab.green, ba.blue);
  EXPECT_EQ(ab.blue, ba.green);
  const auto [g2, b2] = naive_cross(gi, bi, p.green, p.blue, cfg.eps_bn);
  EXPECT_LT((ab.green - g2).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((ab.blue - b2).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PredictDav, ZeroEmbeddingsGiveHalf) {
  const BlockConfig cfg = toy_config();
  std::mt19937_64 rng(5);
  auto p = dav::init_params<double>(cfg, rng);
  p.green.post = dav::Conv1x1<double>::zeros(cfg.c_embed, cfg.c_embed);
  p.blue.post = dav::Conv1x1<double>::zeros(cfg.c_embed, cfg.c_embed);
  const auto x = dav::random_features<double>(3, 2, cfg.c_in, rng);
  const Mat d = dav::predict_dav(x, p, cfg);
  EXPECT_TRUE((d.array() == 0.5).all());
}

TEST(PredictDav, PublishedGridShape) {
  const BlockConfig cfg{4, 4, 2, 1e-5, true};
  std::mt19937_64 rng(6);
  const auto x = dav::random_features<double>(29, 38, 4, rng);
  const Mat d = dav::predict_dav(x, dav::init_params<double>(cfg, rng), cfg);
  EXPECT_EQ(d.rows(), 1102);
  EXPECT_EQ(d.cols(), 1102);
  EXPECT_GT(d.minCoeff(), 0.0);
  EXPECT_LT(d.maxCoeff(), 1.0);
}

TEST(PredictDav, DoubleLoopOracle) {
  for (bool scaled : {true, false}) {
    BlockConfig cfg = toy_config();
    cfg.scale_logits = scaled;
    std::mt19937_64 rng(7);
    const auto p = random_params(cfg, rng);
    const auto x = dav::random_features<double>(2, 2, cfg.c_in, rng);
    const auto [g2, b2] = naive_cross(naive_conv(x.data, p.green.embed), naive_conv(x.data, p.blue.embed), p.green,
                                      p.blue, cfg.eps_bn);
    const Mat d = dav::predict_dav(x, p, cfg);
    const double s = scaled ? 1.0 / std::sqrt(double(cfg.c_embed)) : 1.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double dot = 0.0;
        for (int k = 0; k < cfg.c_embed; ++k) dot += g2(i, k) * b2(j, k);
        EXPECT_NEAR(d(i, j), 1.0 / (1.0 + std::exp(-dot * s)), 1e-12);
      }
  }
}

TEST(Forward, ZeroOutputConvIsIdentity) {
  const BlockConfig cfg = toy_config();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    auto p = random_params(cfg, rng);
    p.out = dav::Conv1x1<double>::zeros(cfg.c_orange, cfg.c_in);
    p.out_norm = dav::Normalization<double>::identity(cfg.c_in);
    const auto x = dav::random_features<double>(3, 4, cfg.c_in, rng);
    EXPECT_EQ(dav::forward(x, p, cfg).y.data, x.data);
  }
}

TEST(Forward, IdentityDavAggregatesOrange) {
  const BlockConfig cfg = toy_config();
  std::mt19937_64 rng(8);
  const auto p = random_params(cfg, rng);
  const auto x = dav::random_features<double>(2, 3, cfg.c_in, rng);
  const Mat eye = Mat::Identity(6, 6);
  const auto f = dav::forward(x, p, cfg, &eye);
  EXPECT_EQ(f.aggregated, f.orange);
  const Mat wrong = Mat::Identity(5, 5);
  EXPECT_THROW(dav::forward(x, p, cfg, &wrong), dav::ConfigurationError);
}

TEST(Forward, QuadrupleLoopAggregationOracle) {
  const BlockConfig cfg = toy_config();
  std::mt19937_64 rng(9);
  const auto p = random_params(cfg, rng);
  const auto x = dav::random_features<double>(2, 3, cfg.c_in, rng);
  const auto f = dav::forward(x, p, cfg);
  const Mat orange = naive_conv(x.data, p.orange);
  // agg[(r,c), k] = sum over (r', c') of dav[(r,c), (r',c')] * orange[(r',c'), k]
  Mat agg = Mat::Zero(6, cfg.c_orange);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c)
      for (int r2 = 0; r2 < 2; ++r2)
        for (int c2 = 0; c2 < 3; ++c2)
          for (int k = 0; k < cfg.c_orange; ++k) agg(r * 3 + c, k) += f.dav(r * 3 + c, r2 * 3 + c2) * orange(r2 * 3 + c2, k);
  const Mat y = x.data + naive_norm(naive_conv(agg, p.out), p.out_norm, cfg.eps_bn);
  EXPECT_LT((f.aggregated - agg).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((f.y.data - y).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Forward, ChannelMismatch) {
  const BlockConfig cfg = toy_config();
  std::mt19937_64 rng(10);
  const auto p = dav::init_params<double>(cfg, rng);
  const auto x = dav::random_features<double>(2, 2, cfg.c_in + 1, rng);
  EXPECT_THROW(dav::forward(x, p, cfg), dav::ConfigurationError);
}

TEST(Forward, PermutationEquivariance) {
  const BlockConfig cfg = toy_config();
  std::mt19937_64 rng(11);
  const auto p = random_params(cfg, rng);
  const auto x = dav::random_features<double>(3, 3, cfg.c_in, rng);
  std::vector<int> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  FeatureMap<double> xp = x;
  for (int i = 0; i < 9; ++i) xp.data.row(i) = x.data.row(perm[i]);
  const auto f = dav::forward(x, p, cfg);
  const auto fp = dav::forward(xp, p, cfg);
  for (int i = 0; i < 9; ++i) {
    EXPECT_LT((fp.y.data.row(i) - f.y.data.row(perm[i])).cwiseAbs().maxCoeff(), 1e-12);
    for (int j = 0; j < 9; ++j) EXPECT_NEAR(fp.dav(i, j), f.dav(perm[i], perm[j]), 1e-12);
  }
}

TEST(Forward, FloatInstantiationTracksDouble) {
  const BlockConfig cfg = toy_config();
  std::mt19937_64 rng(12);
  const auto p = random_params(cfg, rng);
  const auto x = dav::random_features<double>(2, 3, cfg.c_in, rng);
  const auto pf = dav::cast_params<float>(p, cfg);
  const FeatureMap<float> xf(x.h, x.w, x.data.cast<float>());
  const auto f = dav::forward(x, p, cfg);
  const auto ff = dav::forward(xf, pf, cfg);
  EXPECT_LT((ff.y.data.cast<double>() - f.y.data).cwiseAbs().maxCoeff(), 1e-4);
  EXPECT_LT((ff.dav.cast<double>() - f.dav).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Backward, ZeroUpstreamGivesZeroBundle) {
  const BlockConfig cfg = toy_config();
  std::mt19937_64 rng(13);
  const auto p = random_params(cfg, rng);
  const auto x = dav::random_features<double>(2, 2, cfg.c_in, rng);
  const auto g = dav::backward(x, p, cfg, Mat(Mat::Zero(4, cfg.c_in)), Mat(Mat::Zero(4, 4)));
  EXPECT_EQ(dav::flatten(g.params).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(g.input.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Backward, FiniteDifferenceEveryTensor) {
  for (std::uint64_t seed : {0ull, 1ull, 2ull}) {
    dav::GradCheckOptions opt;
    opt.seed = seed;
    const auto report = dav::check_block_gradients(opt);
    EXPECT_TRUE(report.passed) << "seed " << seed;
    EXPECT_EQ(report.tensors.size(), dav::gradient_tensor_names().size());
    for (const auto& t : report.tensors) {
      EXPECT_LT(t.relative_error, 1e-4) << t.name;
      // Only the output-conv bias, which feeds a normalization, is exactly
      // zero; everything else must carry signal so the check means something.
      if (t.name != "out.bias") EXPECT_GT(t.analytic_norm, 1e-3) << t.name;
    }
  }
}

TEST(Backward, UnscaledLogitsAndOddShape) {
  dav::GradCheckOptions opt;
  opt.h = 3;
  opt.w = 2;
  opt.block = {4, 5, 3, 1e-5, false};
  opt.seed = 17;
  EXPECT_TRUE(dav::check_block_gradients(opt).passed);
}

TEST(Backward, CorruptedGradientFails) {
  for (const char* name : {"green.embed.weight", "blue.post.bias", "out_norm.scale", "input"}) {
    dav::GradCheckOptions opt;
    opt.corrupt_tensor = name;
    const auto report = dav::check_block_gradients(opt);
    EXPECT_FALSE(report.passed) << name;
    for (const auto& t : report.tensors) EXPECT_EQ(t.passed, t.name != name) << t.name;
  }
  dav::GradCheckOptions bad;
  bad.corrupt_tensor = "no.such.tensor";
  EXPECT_THROW(dav::check_block_gradients(bad), dav::ConfigurationError);
}

TEST(Params, FlattenRoundTripAndCount) {
  const BlockConfig cfg = toy_config();
  std::mt19937_64 rng(14);
  const auto p = random_params(cfg, rng);
  const Eigen::VectorXd flat = dav::flatten(p);
  const Eigen::Index expected = 2 * (cfg.c_in * cfg.c_embed + cfg.c_embed + 2 * cfg.c_embed +
                                     3 * (cfg.c_embed * cfg.c_embed + cfg.c_embed)) +
                                (cfg.c_in * cfg.c_orange + cfg.c_orange) + (cfg.c_orange * cfg.c_in + cfg.c_in) +
                                2 * cfg.c_in;
  EXPECT_EQ(flat.size(), expected);
  EXPECT_EQ(dav::parameter_count(p), expected);
  auto q = BlockParams<double>::zeros(cfg);
  dav::unflatten(flat, q);
  EXPECT_EQ(dav::flatten(q), flat);
  EXPECT_EQ(q.green.post.weight, p.green.post.weight);
  EXPECT_EQ(q.out_norm.shift, p.out_norm.shift);
  EXPECT_THROW(dav::unflatten(Eigen::VectorXd(flat.size() + 1), q), dav::ConfigurationError);
}

dav::DepthMap two_plane_scene(std::uint64_t seed) {
  return dav::render(dav::make_room(seed, 2, dav::default_camera(64, 64))).depth;
}

TEST(ToyTrain, ZeroLearningRateIsFlat) {
  dav::ToyTrainConfig cfg;
  cfg.steps = 5;
  cfg.learning_rate = 0.0;
  const auto r = dav::toy_train(two_plane_scene(1), cfg);
  ASSERT_EQ(r.trace.size(), 6u);
  for (double v : r.trace) EXPECT_EQ(v, r.trace.front());
}

TEST(ToyTrain, DeterministicReplay) {
  dav::ToyTrainConfig cfg;
  cfg.steps = 20;
  cfg.seed = 3;
  const auto scene = two_plane_scene(3);
  const auto a = dav::toy_train(scene, cfg);
  const auto b = dav::toy_train(scene, cfg);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(dav::flatten(a.params), dav::flatten(b.params));
}

TEST(ToyTrain, TwoHundredStepsHalveTheLoss) {
  for (std::uint64_t seed : {0ull, 1ull, 2ull}) {
    dav::ToyTrainConfig cfg;
    cfg.seed = seed;
    const auto r = dav::toy_train(two_plane_scene(seed), cfg);
    ASSERT_EQ(r.trace.size(), 201u);
    EXPECT_LT(r.trace.back(), 0.5 * r.trace.front()) << "seed " << seed;
  }
}

TEST(ToyTrain, DivergenceReportsStep) {
  dav::ToyTrainConfig cfg;
  cfg.steps = 50;
  cfg.learning_rate = 1e300;
  try {
    dav::toy_train(two_plane_scene(0), cfg);
    FAIL() << "expected divergence";
  } catch (const dav::DivergenceError& e) {
    EXPECT_GE(e.step(), 1);
    EXPECT_LE(e.step(), 50);
  }
}

TEST(ToyTrain, InvalidConfig) {
  dav::ToyTrainConfig cfg;
  cfg.learning_rate = -1.0;
  EXPECT_THROW(dav::toy_train(two_plane_scene(0), cfg), dav::ConfigurationError);
  cfg = {};
  cfg.steps = -2;
  EXPECT_THROW(dav::toy_train(two_plane_scene(0), cfg), dav::ConfigurationError);
}

}  // namespace
