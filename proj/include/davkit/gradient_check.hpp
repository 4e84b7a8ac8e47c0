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
#include <optional>
#include <string>
#include <vector>

#include "davkit/attention_block.hpp"

namespace dav {

struct GradCheckOptions {
  int h = 4;
  int w = 4;
  BlockConfig block{8, 32, 8, 1e-5, true};
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Denominator floor of the relative error, as a fraction of the largest
  /// gradient norm in the report. A tensor whose exact gradient is zero (a
  /// bias feeding straight into a normalization) is then judged on its
  /// finite-difference noise against the overall gradient scale rather than
  /// on noise / noise.
  double norm_floor = 1e-3;
  std::uint64_t seed = 0;
  /// Test hook: scale the analytic gradient of this tensor by 1.5 before
  /// comparing, which must make the check fail.
  std::optional<std::string> corrupt_tensor;
};

struct TensorCheck {
  std::string name;
  Eigen::Index size = 0;
  double analytic_norm = 0.0;
  double numeric_norm = 0.0;
  double relative_error = 0.0;  // |analytic - numeric| / max(|analytic|, |numeric|, floor), 2-norms
  bool passed = false;
};

struct GradCheckReport {
  std::vector<TensorCheck> tensors;  // every parameter tensor, then "input"
  bool passed = false;
};

/// Relative error between two gradient vectors; 0 when both vanish.
double relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric, double floor = 0.0);

/// Names visited by check_block_gradients, in report order.
std::vector<std::string> gradient_tensor_names();

/// Compares backward() against central differences of the scalar
/// L = sum(R_y .* y) + sum(R_d .* dav) for random R_y, R_d, on random
/// features and random parameters (output convolution included).
GradCheckReport check_block_gradients(const GradCheckOptions& options);

}  // namespace dav
