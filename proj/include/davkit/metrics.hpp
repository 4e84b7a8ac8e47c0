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

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "davkit/geometry.hpp"

namespace dav {

/// Depths outside (min, max] in either map are excluded from every metric.
struct DepthRange {
  double min = 0.0;
  double max = 10.0;
};

/// Every scalar of the evaluation suite for one prediction / ground-truth
/// pair. Planarity and boundary errors are absent when they cannot be
/// computed (no annotated regions, no edges).
struct MetricsReport {
  std::size_t pixel_count = 0;
  double rel = 0.0;
  double rmse = 0.0;
  double log10 = 0.0;
  double sqrel = 0.0;
  double si = 0.0;
  double imae = 0.0;
  double irmse = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  std::optional<double> eps_plan;  // centimetres
  std::optional<double> eps_orie;  // degrees
  std::optional<double> eps_acc;   // pixels
  std::optional<double> eps_comp;  // pixels
  double eps_0 = 0.0;              // percent
  double eps_minus = 0.0;
  double eps_plus = 0.0;
};

struct PlanarityErrors {
  double eps_plan = 0.0;  // mean over regions of the std of point-to-plane distances, cm
  double eps_orie = 0.0;  // mean angle between fitted GT and predicted normals, degrees
  int regions_used = 0;
  int regions_skipped = 0;
};

struct BoundaryErrors {
  std::optional<double> eps_acc;
  std::optional<double> eps_comp;
};

struct DirectedErrors {
  double eps_0 = 0.0;      // % on the same side of the reference depth as GT
  double eps_minus = 0.0;  // % predicted in front while GT is behind
  double eps_plus = 0.0;   // % predicted behind while GT is in front
};

struct EdgeMaps {
  Mask edges;
  Eigen::ArrayXXd distance;
};

/// Pixels valid in both maps with both depths inside the range.
Mask evaluation_mask(const DepthMap& pred, const DepthMap& gt, const DepthRange& range = {});

/// REL, RMSE, log10, sqREL, SI, iMAE, iRMSE and the delta accuracies. The
/// other report fields are left at their defaults.
MetricsReport basic_metrics(const DepthMap& pred, const DepthMap& gt, const DepthRange& range = {});

/// `regions` lists annotated planar regions as row-major pixel indices.
PlanarityErrors planarity_errors(const DepthMap& pred, const DepthMap& gt, const CameraIntrinsics& camera,
                                 const std::vector<std::vector<int>>& regions, const DepthRange& range = {});

/// Sobel-magnitude edges (restricted to pixels whose 3x3 neighbourhood is
/// inside `mask`) and their distance transform.
EdgeMaps edge_maps(const DepthMap& depth, const Mask& mask, double edge_threshold);

/// Boundary accuracy / completeness. Distances to an empty edge set are
/// capped at the image diagonal so a missing edge map costs the maximum.
BoundaryErrors boundary_errors(const DepthMap& pred, const DepthMap& gt, double edge_threshold = 0.5,
                               const DepthRange& range = {});

DirectedErrors directed_depth_errors(const DepthMap& pred, const DepthMap& gt, double reference = 3.0,
                                     const DepthRange& range = {});

/// Exact Euclidean distance from every pixel to the nearest set pixel
/// (separable lower-envelope algorithm). +infinity everywhere when no pixel
/// is set.
Eigen::ArrayXXd distance_transform(const Mask& edges);

struct EvaluationOptions {
  DepthRange range;
  double edge_threshold = 0.5;
  double reference_depth = 3.0;
  std::optional<CameraIntrinsics> camera;   // needed for planarity errors
  std::vector<std::vector<int>> regions;    // annotated planes
};

MetricsReport evaluate(const DepthMap& pred, const DepthMap& gt, const EvaluationOptions& options = {});

}  // namespace dav
