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

#include "davkit/gradient_check.hpp"

#include <algorithm>
#include <random>

namespace dav {

namespace {

double probe_loss(const FeatureMap<double>& x, const BlockParams<double>& params, const BlockConfig& cfg,
                  const Eigen::MatrixXd& weight_y, const Eigen::MatrixXd& weight_dav) {
  const BlockForward<double> f = forward(x, params, cfg);
  return f.y.data.cwiseProduct(weight_y).sum() + f.dav.cwiseProduct(weight_dav).sum();
}

}  // namespace

double relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric, double floor) {
  const double scale = std::max({analytic.norm(), numeric.norm(), floor});
  if (scale == 0.0) return 0.0;
  return (analytic - numeric).norm() / scale;
}

std::vector<std::string> gradient_tensor_names() {
  BlockConfig cfg;
  BlockParams<double> params = BlockParams<double>::zeros(cfg);
  std::vector<std::string> names;
  for_each_tensor(params, [&](std::string_view name, double*, Eigen::Index) { names.emplace_back(name); });
  names.emplace_back("input");
  return names;
}

GradCheckReport check_block_gradients(const GradCheckOptions& options) {
  const BlockConfig& cfg = options.block;
  if (options.corrupt_tensor) {
    const auto names = gradient_tensor_names();
    if (std::find(names.begin(), names.end(), *options.corrupt_tensor) == names.end())
      throw ConfigurationError("unknown gradient tensor '" + *options.corrupt_tensor + "'");
  }
  if (!(options.step > 0.0) || !(options.tolerance > 0.0) || options.norm_floor < 0.0 || options.h < 1 ||
      options.w < 1)
    throw ConfigurationError("invalid gradient-check options");
  std::mt19937_64 rng(options.seed);
  FeatureMap<double> x = random_features<double>(options.h, options.w, cfg.c_in, rng);
  BlockParams<double> params = init_params<double>(cfg, rng, /*zero_output=*/false);
  // Perturb the normalization parameters away from the identity as well.
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto* norm : {&params.green.norm, &params.blue.norm, &params.out_norm}) {
    for (Eigen::Index i = 0; i < norm->scale.size(); ++i) norm->scale(i) = 1.0 + 0.2 * normal(rng);
    for (Eigen::Index i = 0; i < norm->shift.size(); ++i) norm->shift(i) = 0.2 * normal(rng);
  }
  Eigen::MatrixXd weight_y(x.positions(), cfg.c_in);
  Eigen::MatrixXd weight_dav(x.positions(), x.positions());
  for (Eigen::Index i = 0; i < weight_y.size(); ++i) weight_y.data()[i] = normal(rng);
  for (Eigen::Index i = 0; i < weight_dav.size(); ++i) weight_dav.data()[i] = normal(rng);

  GradientBundle<double> analytic = backward(x, params, cfg, weight_y, weight_dav);

  GradCheckReport report;
  report.passed = true;
  const double h = options.step;
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
  auto finish = [&](std::string name, const Eigen::VectorXd& a, const Eigen::VectorXd& n) {
    TensorCheck c;
    c.name = std::move(name);
    c.size = a.size();
    c.analytic_norm = a.norm();
    c.numeric_norm = n.norm();
    report.tensors.push_back(std::move(c));
    pairs.emplace_back(a, n);
  };

  // Collect analytic tensors by name, in order.
  std::vector<std::pair<std::string, Eigen::VectorXd>> analytic_tensors;
  for_each_tensor(analytic.params, [&](std::string_view name, double* data, Eigen::Index n) {
    Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(data, n);
    if (options.corrupt_tensor && *options.corrupt_tensor == name) v *= 1.5;
    analytic_tensors.emplace_back(std::string(name), std::move(v));
  });

  std::size_t k = 0;
  for_each_tensor(params, [&](std::string_view name, double* data, Eigen::Index n) {
    Eigen::VectorXd numeric(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double saved = data[i];
      data[i] = saved + h;
      const double plus = probe_loss(x, params, cfg, weight_y, weight_dav);
      data[i] = saved - h;
      const double minus = probe_loss(x, params, cfg, weight_y, weight_dav);
      data[i] = saved;
      numeric(i) = (plus - minus) / (2.0 * h);
    }
    finish(std::string(name), analytic_tensors[k++].second, numeric);
  });

  Eigen::VectorXd numeric_input(x.data.size());
  for (Eigen::Index i = 0; i < x.data.size(); ++i) {
    const double saved = x.data.data()[i];
    x.data.data()[i] = saved + h;
    const double plus = probe_loss(x, params, cfg, weight_y, weight_dav);
    x.data.data()[i] = saved - h;
    const double minus = probe_loss(x, params, cfg, weight_y, weight_dav);
    x.data.data()[i] = saved;
    numeric_input(i) = (plus - minus) / (2.0 * h);
  }
  Eigen::VectorXd analytic_input = Eigen::Map<const Eigen::VectorXd>(analytic.input.data(), analytic.input.size());
  if (options.corrupt_tensor && *options.corrupt_tensor == "input") analytic_input *= 1.5;
  finish("input", analytic_input, numeric_input);

  double largest = 0.0;
  for (const auto& t : report.tensors) largest = std::max({largest, t.analytic_norm, t.numeric_norm});
  const double floor = options.norm_floor * largest;
  for (std::size_t i = 0; i < report.tensors.size(); ++i) {
    TensorCheck& c = report.tensors[i];
    c.relative_error = relative_error(pairs[i].first, pairs[i].second, floor);
    c.passed = c.relative_error < options.tolerance;
    report.passed = report.passed && c.passed;
  }
  return report;
}

}  // namespace dav
