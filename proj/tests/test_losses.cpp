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

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "davkit/errors.hpp"
#include "davkit/losses.hpp"
#include "oracles.hpp"

namespace {

using dav::DepthMap;
using Mat = Eigen::MatrixXd;

constexpr double kStep = 1e-6;
constexpr double kTol = 1e-5;

Mat random_matrix(int r, int c, std::mt19937_64& rng, double lo = 0.05, double hi = 0.95) {
  std::uniform_real_distribution<double> d(lo, hi);
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
  return m;
}

// Replicate-padded Sobel derivative (kernel / 8) at (v, u).
double sobel_at(const Eigen::ArrayXXd& f, int v, int u, bool x_direction) {
  auto at = [&](int y, int x) {
    y = std::clamp(y, 0, static_cast<int>(f.rows()) - 1);
    x = std::clamp(x, 0, static_cast<int>(f.cols()) - 1);
    return f(y, x);
  };
  if (x_direction)
    return ((at(v - 1, u + 1) + 2 * at(v, u + 1) + at(v + 1, u + 1)) -
            (at(v - 1, u - 1) + 2 * at(v, u - 1) + at(v + 1, u - 1))) /
           8.0;
  return ((at(v + 1, u - 1) + 2 * at(v + 1, u) + at(v + 1, u + 1)) -
          (at(v - 1, u - 1) + 2 * at(v - 1, u) + at(v - 1, u + 1))) /
         8.0;
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double dot = 0, na = 0, nb = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) dot += a(i) * b(i), na += a(i) * a(i), nb += b(i) * b(i);
  return dot / std::sqrt(na * nb);
}

double ang_oracle(const Mat& p, const Mat& a) {
  double s = 0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) s += std::abs(1 - cosine(p.row(i).transpose(), a.row(i).transpose()));
  for (Eigen::Index j = 0; j < p.cols(); ++j) s += std::abs(1 - cosine(p.col(j), a.col(j)));
  return s / static_cast<double>(p.rows());
}

DepthMap depth(const Mat& m) { return DepthMap(m.array()); }

TEST(Mae, Examples) {
  std::mt19937_64 rng(1);
  const Mat a = random_matrix(9, 9, rng);
  EXPECT_EQ(dav::l_mae(a, a).value, 0.0);
  EXPECT_NEAR(dav::l_mae((a.array() + 0.1).matrix(), a).value, 0.1, 1e-15);
  const Mat b = random_matrix(9, 9, rng);
  double s = 0;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) s += std::abs(a(i, j) - b(i, j));
  EXPECT_NEAR(dav::l_mae(a, b).value, s / 81.0, 1e-12);
  EXPECT_EQ(dav::l_mae(a, b).value, dav::l_mae(b, a).value);
  EXPECT_THROW(dav::l_mae(a, Mat(3, 3)), dav::ConfigurationError);
}

TEST(Ang, Examples) {
  std::mt19937_64 rng(2);
  const Mat a = random_matrix(4, 4, rng);
  EXPECT_NEAR(dav::l_ang(a, a).value, 0.0, 1e-15);
  EXPECT_NEAR(dav::l_ang(2.0 * a, a).value, 0.0, 1e-15);
  Mat p(2, 2), g(2, 2);
  p << 0.9, 0.1, 0.3, 0.4;
  g << 0.5, 0.2, 0.1, 0.5;
  EXPECT_NEAR(dav::l_ang(p, g).value, ang_oracle(p, g), 1e-12);
  const Mat q = random_matrix(9, 9, rng);
  const Mat r = random_matrix(9, 9, rng);
  for (double c : {0.5, 3.0, 17.0}) EXPECT_NEAR(dav::l_ang(c * q, r).value, dav::l_ang(q, r).value, 1e-12);
}

TEST(Ang, ZeroRowWarns) {
  Mat p(2, 2), g(2, 2);
  p << 0.0, 0.0, 0.3, 0.4;
  g << 0.5, 0.2, 0.1, 0.5;
  const auto r = dav::l_ang(p, g);
  EXPECT_TRUE(r.warning);
  // Zero row counts as cosine 0: penalty 1 for that row.
  const double rest = std::abs(1 - cosine(p.row(1).transpose(), g.row(1).transpose())) +
                      std::abs(1 - cosine(p.col(0), g.col(0))) + std::abs(1 - cosine(p.col(1), g.col(1)));
  EXPECT_NEAR(r.value, (1.0 + rest) / 2.0, 1e-12);
  EXPECT_TRUE(std::isfinite(r.value));
  EXPECT_TRUE(r.gradient.allFinite());
}

TEST(Attention, ReductionsAndComposition) {
  std::mt19937_64 rng(3);
  const Mat a = random_matrix(9, 9, rng), b = random_matrix(9, 9, rng);
  dav::LossWeights w;
  EXPECT_NEAR(dav::l_attention(a, a, w).value, 0.0, 1e-15);
  w.lambda = 0.0;
  EXPECT_EQ(dav::l_attention(a, b, w).value, dav::l_mae(a, b).value);
  EXPECT_EQ(dav::l_attention(a, b, w).gradient, dav::l_mae(a, b).gradient);
  w.lambda = 1.0;
  EXPECT_NEAR(dav::l_attention(a, b, w).value, dav::l_mae(a, b).value + dav::l_ang(a, b).value, 1e-12);
  w.lambda = 0.3;
  EXPECT_NEAR(dav::l_attention(a, b, w).value, dav::l_mae(a, b).value + 0.3 * ang_oracle(a, b), 1e-12);
}

TEST(Log, Examples) {
  std::mt19937_64 rng(4);
  const Mat g = random_matrix(4, 4, rng, 1.0, 3.0);
  EXPECT_NEAR(dav::l_log(depth(g), depth(g)).value, std::log(0.5), 1e-15);
  EXPECT_NEAR(dav::l_log(depth((g.array() + 0.5).matrix()), depth(g)).value, 0.0, 1e-15);
  const Mat p = random_matrix(4, 4, rng, 1.0, 3.0);
  double s = 0;
  for (int i = 0; i < 16; ++i) s += std::log(std::abs(p.data()[i] - g.data()[i]) + 0.5);
  EXPECT_NEAR(dav::l_log(depth(p), depth(g)).value, s / 16.0, 1e-12);
  EXPECT_THROW(dav::l_log(depth(Mat::Zero(2, 2)), depth(g.topLeftCorner(2, 2))), dav::DegenerateInputError);
  EXPECT_THROW(dav::l_log(depth(g), depth(Mat::Ones(3, 4))), dav::ConfigurationError);
}

TEST(Log, MaskedPixelsIgnored) {
  Mat g = Mat::Constant(3, 3, 2.0), p = Mat::Constant(3, 3, 2.5);
  g(1, 1) = 0.0;
  const auto r = dav::l_log(depth(p), depth(g));
  EXPECT_NEAR(r.value, 0.0, 1e-15);
  EXPECT_EQ(r.gradient(1, 1), 0.0);
}

TEST(Grad, Examples) {
  std::mt19937_64 rng(5);
  const Mat g = random_matrix(5, 6, rng, 1.0, 3.0);
  EXPECT_NEAR(dav::l_grad(depth(g), depth(g)).value, 2 * std::log(0.5), 1e-15);
  EXPECT_NEAR(dav::l_grad(depth((g.array() + 0.7).matrix()), depth(g)).value, 2 * std::log(0.5), 1e-15);
  const Mat p = random_matrix(5, 6, rng, 1.0, 3.0);
  const Eigen::ArrayXXd e = (p - g).array().abs();
  double s = 0;
  for (int v = 0; v < 5; ++v)
    for (int u = 0; u < 6; ++u)
      s += std::log(std::abs(sobel_at(e, v, u, true)) + 0.5) + std::log(std::abs(sobel_at(e, v, u, false)) + 0.5);
  EXPECT_NEAR(dav::l_grad(depth(p), depth(g)).value, s / 30.0, 1e-12);
}

TEST(Norm, Examples) {
  std::mt19937_64 rng(6);
  const Mat g = random_matrix(6, 6, rng, 1.0, 3.0);
  EXPECT_EQ(dav::l_norm(depth(g), depth(g)).value, 0.0);
  EXPECT_NEAR(dav::l_norm(depth((g.array() + 1.25).matrix()), depth(g)).value, 0.0, 1e-12);
  Mat ramp(6, 6);
  for (int v = 0; v < 6; ++v)
    for (int u = 0; u < 6; ++u) ramp(v, u) = 2.0 + 0.3 * u;
  // Interior pixels see the exact ramp normal; replicate padding halves the
  // slope at the left and right borders.
  const double c_in = 1.0 / std::sqrt(1.0 + 0.09);
  const double c_edge = 1.0 / std::sqrt(1.0 + 0.0225);
  const double expect = (24 * (1 - c_in) + 12 * (1 - c_edge)) / 36.0;
  EXPECT_NEAR(dav::l_norm(depth(ramp), depth(Mat::Constant(6, 6, 2.0))).value, expect, 1e-12);
}

TEST(DepthAndTotal, ReductionsAndPerfectValue) {
  std::mt19937_64 rng(7);
  const Mat g = random_matrix(5, 5, rng, 1.0, 3.0), p = random_matrix(5, 5, rng, 1.0, 3.0);
  const Mat a = random_matrix(4, 4, rng), b = random_matrix(4, 4, rng);
  dav::LossWeights w;
  w.mu = 0.0;
  w.theta = 0.0;
  EXPECT_EQ(dav::l_depth(depth(p), depth(g), w).value, dav::l_log(depth(p), depth(g)).value);
  w = {};
  w.mu = 0.7;
  w.theta = 1.9;
  const double composed = dav::l_log(depth(p), depth(g)).value + 0.7 * dav::l_grad(depth(p), depth(g)).value +
                          1.9 * dav::l_norm(depth(p), depth(g)).value;
  EXPECT_NEAR(dav::l_depth(depth(p), depth(g), w).value, composed, 1e-12);
  EXPECT_NEAR(dav::l_depth(depth(g), depth(g), w).value, std::log(0.5) * (1 + 2 * 0.7), 1e-12);

  w.gamma = 0.0;
  const auto t0 = dav::l_total(a, b, depth(p), depth(g), w);
  EXPECT_EQ(t0.value, dav::l_attention(a, b, w).value);
  EXPECT_EQ(t0.depth_gradient.cwiseAbs().maxCoeff(), 0.0);
  w.gamma = 2.5;
  const auto t = dav::l_total(a, b, depth(p), depth(g), w);
  EXPECT_NEAR(t.value, dav::l_attention(a, b, w).value + 2.5 * composed, 1e-12);
  const auto perfect = dav::l_total(a, a, depth(g), depth(g), w);
  EXPECT_NEAR(perfect.value, std::log(0.5) * (1 + 2 * 0.7) * 2.5, 1e-12);

  w.lambda = w.mu = w.theta = w.gamma = 0.0;
  EXPECT_EQ(dav::l_total(a, b, depth(p), depth(g), w).value, dav::l_mae(a, b).value);
}

TEST(Weights, Validation) {
  dav::LossWeights w;
  EXPECT_NO_THROW(w.validate());
  w.alpha = 0.0;
  EXPECT_THROW(w.validate(), dav::ConfigurationError);
  w = {};
  w.mu = -1.0;
  EXPECT_THROW(w.validate(), dav::ConfigurationError);
}

TEST(Floors, NeverBelowPerfection) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const Mat g = random_matrix(5, 5, rng, 1.0, 3.0), p = random_matrix(5, 5, rng, 1.0, 3.0);
    const Mat a = random_matrix(4, 4, rng), b = random_matrix(4, 4, rng);
    EXPECT_GE(dav::l_mae(a, b).value, 0.0);
    EXPECT_GE(dav::l_ang(a, b).value, 0.0);
    EXPECT_GE(dav::l_norm(depth(p), depth(g)).value, 0.0);
    EXPECT_GE(dav::l_log(depth(p), depth(g)).value, std::log(0.5));
    EXPECT_GE(dav::l_grad(depth(p), depth(g)).value, 2 * std::log(0.5));
  }
}

// Finite-difference checks. Entries sitting on an absolute-value kink are
// excluded from the comparison.

TEST(Gradients, AttentionTerms) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const Mat a = random_matrix(16, 16, rng), b = random_matrix(16, 16, rng);
    const dav::Mask keep = ((a - b).array().abs() >= 1e-9);
    const auto mae = [&](const Mat& x) { return dav::l_mae(x, b).value; };
    EXPECT_LT(oracle::relative_error(dav::l_mae(a, b).gradient, oracle::numeric_gradient(mae, a, kStep), keep), kTol);
    const auto ang = [&](const Mat& x) { return dav::l_ang(x, b).value; };
    EXPECT_LT(oracle::relative_error(dav::l_ang(a, b).gradient, oracle::numeric_gradient(ang, a, kStep)), kTol);
    dav::LossWeights w;
    w.lambda = 0.6;
    const auto att = [&](const Mat& x) { return dav::l_attention(x, b, w).value; };
    EXPECT_LT(oracle::relative_error(dav::l_attention(a, b, w).gradient, oracle::numeric_gradient(att, a, kStep), keep),
              kTol);
  }
}

TEST(Gradients, DepthTerms) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    Mat g = random_matrix(4, 4, rng, 1.0, 3.0);
    const Mat p = random_matrix(4, 4, rng, 1.0, 3.0);
    if (trial == 4) g(0, 3) = 0.0;  // one invalid ground-truth pixel
    const DepthMap gt = depth(g);
    const dav::Mask keep = ((p - g).array().abs() >= 1e-9);
    const auto log_f = [&](const Mat& x) { return dav::l_log(depth(x), gt).value; };
    EXPECT_LT(oracle::relative_error(dav::l_log(depth(p), gt).gradient, oracle::numeric_gradient(log_f, p, kStep), keep),
              kTol);
    const auto grad_f = [&](const Mat& x) { return dav::l_grad(depth(x), gt).value; };
    EXPECT_LT(
        oracle::relative_error(dav::l_grad(depth(p), gt).gradient, oracle::numeric_gradient(grad_f, p, kStep), keep),
        kTol);
    const auto norm_f = [&](const Mat& x) { return dav::l_norm(depth(x), gt).value; };
    if (trial < 4)
      EXPECT_LT(oracle::relative_error(dav::l_norm(depth(p), gt).gradient, oracle::numeric_gradient(norm_f, p, kStep)),
                kTol);
    dav::LossWeights w;
    w.mu = 0.5;
    w.theta = trial < 4 ? 2.0 : 0.0;
    const auto depth_f = [&](const Mat& x) { return dav::l_depth(depth(x), gt, w).value; };
    EXPECT_LT(oracle::relative_error(dav::l_depth(depth(p), gt, w).gradient, oracle::numeric_gradient(depth_f, p, kStep),
                                     keep),
              kTol);
  }
}

TEST(Gradients, TotalKeepsDomainsApart) {
  std::mt19937_64 rng(11);
  const Mat a = random_matrix(16, 16, rng), b = random_matrix(16, 16, rng);
  const Mat g = random_matrix(4, 4, rng, 1.0, 3.0), p = random_matrix(4, 4, rng, 1.0, 3.0);
  dav::LossWeights w;
  w.gamma = 0.4;
  const auto t = dav::l_total(a, b, depth(p), depth(g), w);
  EXPECT_EQ(t.dav_gradient.rows(), 16);
  EXPECT_EQ(t.depth_gradient.rows(), 4);
  const auto f_dav = [&](const Mat& x) { return dav::l_total(x, b, depth(p), depth(g), w).value; };
  const auto f_depth = [&](const Mat& x) { return dav::l_total(a, b, depth(x), depth(g), w).value; };
  EXPECT_LT(oracle::relative_error(t.dav_gradient, oracle::numeric_gradient(f_dav, a, kStep)), kTol);
  EXPECT_LT(oracle::relative_error(t.depth_gradient, oracle::numeric_gradient(f_depth, p, kStep)), kTol);
}

}  // namespace
