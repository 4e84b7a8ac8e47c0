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

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "davkit/geometry.hpp"
#include "davkit/plane_detection.hpp"

namespace dav {

/// `Literal` evaluates 1 - sigmoid(.) as written and peaks at 0.5;
/// `Rescaled` doubles it so the peak is 1.
enum class DavVariant { Literal, Rescaled };

std::string_view to_string(DavVariant variant);
/// Parses "literal" / "rescaled"; throws ConfigurationError otherwise.
DavVariant parse_variant(std::string_view name);

/// Largest score the variant can produce (argument 0).
double max_score(DavVariant variant);
/// Score for a non-negative sigmoid argument: scale * (1 - sigmoid(arg)).
double attention_score(double argument, DavVariant variant);

/// Depth samples on the coarse attention grid. Cell (i, j) holds the
/// full-resolution pixel (i*factor + factor/2, j*factor + factor/2), or the
/// nearest valid pixel when that one is invalid. Coordinates are normalized
/// pixel centres in [0, 1].
struct SubsampledGrid {
  int factor = 1;
  int h = 0;
  int w = 0;
  int full_height = 0;
  int full_width = 0;
  Eigen::ArrayXXd depths;
  Eigen::ArrayXXd xs;
  Eigen::ArrayXXd ys;

  /// Homogeneous (x, y, d, 1) of a cell.
  Eigen::Vector4d homogeneous(int i, int j) const { return {xs(i, j), ys(i, j), depths(i, j), 1.0}; }
};

/// H x W x H x W attention tensor stored as an (H*W) x (H*W) matrix; both
/// axes flatten (row, col) row-major.
struct DAVolume {
  int h = 0;
  int w = 0;
  DavVariant variant = DavVariant::Literal;
  Eigen::MatrixXd values;

  int cells() const { return h * w; }
  int flat(int row, int col) const { return row * w + col; }
  double operator()(int p_row, int p_col, int q_row, int q_col) const {
    return values(flat(p_row, p_col), flat(q_row, q_col));
  }
};

struct DavConfig {
  RansacConfig ransac;
  int factor = 8;
  DavVariant variant = DavVariant::Literal;

  void validate() const;
};

struct GroundTruthDav {
  DAVolume volume;
  std::vector<DetectedPlane> planes;  // fitted in (x_norm, y_norm, depth) space
};

SubsampledGrid subsample(const DepthMap& depth, int factor);

/// A0(p, q) = 1 - sigmoid(|d_p - d_q|).
DAVolume dav_zero_order(const SubsampledGrid& grid, DavVariant variant);

/// A_i(p, q) = 1 - sigmoid(|S.X_p| + |S.X_q|) with X = (x, y, d, 1).
DAVolume dav_first_order(const SubsampledGrid& grid, const Plane& plane, DavVariant variant);

/// Element-wise maximum. Throws ConfigurationError on an empty list or
/// mismatched shapes/variants.
DAVolume dav_combine(std::span<const DAVolume> volumes);

/// Every valid pixel as (x_norm, y_norm, depth), the space the attention
/// planes live in.
std::vector<PixelPoint> image_space_points(const DepthMap& depth);

/// Subsample, detect planes in image space, and combine the zero-order
/// volume with one first-order volume per plane.
GroundTruthDav ground_truth_dav(const DepthMap& depth, const DavConfig& cfg);

/// Attention map of one query cell (H x W). Throws BoundsError when the
/// query lies outside the grid.
Eigen::ArrayXXd attention_slice(const DAVolume& dav, int query_row, int query_col);

}  // namespace dav
