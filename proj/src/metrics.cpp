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

#include "davkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Geometry>

#include "davkit/errors.hpp"

namespace dav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Squared distance along one line to the nearest site; `f` holds 0 at sites
// and +inf elsewhere, or squared distances from a previous pass.
void lower_envelope_1d(const std::vector<double>& f, std::vector<double>& out) {
  const int n = static_cast<int>(f.size());
  std::vector<int> sites;
  std::vector<double> bounds;
  sites.reserve(n);
  bounds.reserve(n + 1);
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    while (!sites.empty()) {
      const int p = sites.back();
      const double s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s <= bounds.back()) {
        sites.pop_back();
        bounds.pop_back();
      } else {
        break;
      }
    }
    if (sites.empty()) {
      sites.push_back(q);
      bounds.push_back(-kInf);
    } else {
      const int p = sites.back();
      bounds.push_back(((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p)));
      sites.push_back(q);
    }
  }
  out.assign(n, kInf);
  if (sites.empty()) return;
  std::size_t k = 0;
  for (int q = 0; q < n; ++q) {
    while (k + 1 < sites.size() && bounds[k + 1] < q) ++k;
    const double d = q - sites[k];
    out[q] = d * d + f[sites[k]];
  }
}

Point3 back_project_pixel(int v, int u, double z, const CameraIntrinsics& camera) {
  return {(u - camera.cx) * z / camera.fx, (v - camera.cy) * z / camera.fy, z};
}

double angle_between_degrees(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  // Normals are sign-ambiguous; atan2 stays exact for identical inputs.
  return std::atan2(a.cross(b).norm(), std::abs(a.dot(b))) * 180.0 / std::numbers::pi;
}

}  // namespace

Mask evaluation_mask(const DepthMap& pred, const DepthMap& gt, const DepthRange& range) {
  if (pred.height() != gt.height() || pred.width() != gt.width())
    throw ConfigurationError("predicted and ground-truth depth maps differ in size");
  const auto in_range = [&](const Eigen::ArrayXXd& d) { return (d > range.min) && (d <= range.max); };
  return pred.valid() && gt.valid() && in_range(pred.values()) && in_range(gt.values());
}

MetricsReport basic_metrics(const DepthMap& pred, const DepthMap& gt, const DepthRange& range) {
  const Mask mask = evaluation_mask(pred, gt, range);
  const std::size_t t = static_cast<std::size_t>(mask.count());
  if (t == 0) throw DegenerateInputError("no pixel is valid in both maps within the depth range");

  double abs_rel = 0, sq = 0, log10_sq = 0, sq_rel = 0, inv_abs = 0, inv_sq = 0;
  std::size_t d1 = 0, d2 = 0, d3 = 0;
  std::vector<double> log_ratio;
  log_ratio.reserve(t);
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    if (!mask.data()[i]) continue;
    const double p = pred.values().data()[i];
    const double g = gt.values().data()[i];
    const double e = p - g;
    abs_rel += std::abs(e) / g;
    sq += e * e;
    sq_rel += e * e / (g * g);
    const double l10 = std::log10(p) - std::log10(g);
    log10_sq += l10 * l10;
    const double inv = 1.0 / p - 1.0 / g;
    inv_abs += std::abs(inv);
    inv_sq += inv * inv;
    const double ratio = std::max(p / g, g / p);
    if (ratio < 1.25) ++d1;
    if (ratio < 1.25 * 1.25) ++d2;
    if (ratio < 1.25 * 1.25 * 1.25) ++d3;
    log_ratio.push_back(std::log(p) - std::log(g));
  }
  const double n = static_cast<double>(t);
  double mean_log_ratio = 0.0;
  for (double r : log_ratio) mean_log_ratio += r;
  mean_log_ratio /= n;
  double si = 0.0;
  for (double r : log_ratio) si += (r - mean_log_ratio) * (r - mean_log_ratio);

  MetricsReport report;
  report.pixel_count = t;
  report.rel = abs_rel / n;
  report.rmse = std::sqrt(sq / n);
  report.log10 = std::sqrt(log10_sq / n);
  report.sqrel = sq_rel / n;
  report.si = si / (2.0 * n);
  report.imae = inv_abs / n;
  report.irmse = std::sqrt(inv_sq / n);
  report.delta1 = static_cast<double>(d1) / n;
  report.delta2 = static_cast<double>(d2) / n;
  report.delta3 = static_cast<double>(d3) / n;
  return report;
}

PlanarityErrors planarity_errors(const DepthMap& pred, const DepthMap& gt, const CameraIntrinsics& camera,
                                 const std::vector<std::vector<int>>& regions, const DepthRange& range) {
  camera.validate();
  if (pred.width() != camera.width || pred.height() != camera.height)
    throw ConfigurationError("depth map size does not match the intrinsics");
  const Mask mask = evaluation_mask(pred, gt, range);
  const int width = pred.width();

  PlanarityErrors out;
  double plan_sum = 0.0;
  double orie_sum = 0.0;
  for (const auto& region : regions) {
    std::vector<Point3> pred_points;
    std::vector<Point3> gt_points;
    for (int index : region) {
      if (index < 0 || index >= static_cast<int>(mask.size())) throw BoundsError("region pixel index out of range");
      const int v = index / width;
      const int u = index % width;
      if (!mask(v, u)) continue;
      pred_points.push_back(back_project_pixel(v, u, pred(v, u), camera));
      gt_points.push_back(back_project_pixel(v, u, gt(v, u), camera));
    }
    Plane pred_plane;
    Plane gt_plane;
    try {
      pred_plane = fit_plane_lsq(pred_points);
      gt_plane = fit_plane_lsq(gt_points);
    } catch (const DegenerateInputError&) {
      ++out.regions_skipped;
      continue;
    }
    double mean = 0.0;
    for (const auto& p : pred_points) mean += pred_plane.signed_distance(p);
    mean /= static_cast<double>(pred_points.size());
    double var = 0.0;
    for (const auto& p : pred_points) {
      const double d = pred_plane.signed_distance(p) - mean;
      var += d * d;
    }
    var /= static_cast<double>(pred_points.size());
    plan_sum += 100.0 * std::sqrt(var);
    orie_sum += angle_between_degrees(gt_plane.normal, pred_plane.normal);
    ++out.regions_used;
  }
  if (out.regions_used == 0) throw DegenerateInputError("no annotated region admits a plane fit");
  out.eps_plan = plan_sum / out.regions_used;
  out.eps_orie = orie_sum / out.regions_used;
  return out;
}

Eigen::ArrayXXd distance_transform(const Mask& edges) {
  const int rows = static_cast<int>(edges.rows());
  const int cols = static_cast<int>(edges.cols());
  Eigen::ArrayXXd squared(rows, cols);
  std::vector<double> f;
  std::vector<double> out;
  // Columns first, then rows over the partial squared distances.
  for (int u = 0; u < cols; ++u) {
    f.assign(rows, kInf);
    for (int v = 0; v < rows; ++v)
      if (edges(v, u)) f[v] = 0.0;
    lower_envelope_1d(f, out);
    for (int v = 0; v < rows; ++v) squared(v, u) = out[v];
  }
  for (int v = 0; v < rows; ++v) {
    f.resize(cols);
    for (int u = 0; u < cols; ++u) f[u] = squared(v, u);
    lower_envelope_1d(f, out);
    for (int u = 0; u < cols; ++u) squared(v, u) = out[u];
  }
  return squared.sqrt();
}

EdgeMaps edge_maps(const DepthMap& depth, const Mask& mask, double edge_threshold) {
  const int rows = depth.height();
  const int cols = depth.width();
  const SobelGradient g = sobel_gradient(depth.values());
  EdgeMaps maps;
  maps.edges = Mask::Constant(rows, cols, false);
  for (int v = 0; v < rows; ++v) {
    for (int u = 0; u < cols; ++u) {
      bool inside = true;
      for (int dv = -1; dv <= 1 && inside; ++dv)
        for (int du = -1; du <= 1 && inside; ++du)
          inside = mask(std::clamp(v + dv, 0, rows - 1), std::clamp(u + du, 0, cols - 1));
      if (inside && std::hypot(g.dx(v, u), g.dy(v, u)) > edge_threshold) maps.edges(v, u) = true;
    }
  }
  maps.distance = distance_transform(maps.edges);
  return maps;
}

BoundaryErrors boundary_errors(const DepthMap& pred, const DepthMap& gt, double edge_threshold,
                               const DepthRange& range) {
  if (!(edge_threshold >= 0.0)) throw ConfigurationError("edge threshold must be non-negative");
  const Mask mask = evaluation_mask(pred, gt, range);
  if (mask.count() == 0) throw DegenerateInputError("no pixel is valid in both maps within the depth range");
  const EdgeMaps gt_maps = edge_maps(gt, mask, edge_threshold);
  const EdgeMaps pred_maps = edge_maps(pred, mask, edge_threshold);
  const double cap = std::hypot(static_cast<double>(pred.height()), static_cast<double>(pred.width()));

  const auto weighted_mean = [cap](const Mask& edges, const Eigen::ArrayXXd& distance) -> std::optional<double> {
    const auto count = edges.count();
    if (count == 0) return std::nullopt;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < edges.size(); ++i)
      if (edges.data()[i]) sum += std::min(distance.data()[i], cap);
    return sum / static_cast<double>(count);
  };
  BoundaryErrors out;
  out.eps_acc = weighted_mean(pred_maps.edges, gt_maps.distance);
  out.eps_comp = weighted_mean(gt_maps.edges, pred_maps.distance);
  return out;
}

DirectedErrors directed_depth_errors(const DepthMap& pred, const DepthMap& gt, double reference,
                                     const DepthRange& range) {
  const Mask mask = evaluation_mask(pred, gt, range);
  const double t = static_cast<double>(mask.count());
  if (t == 0) throw DegenerateInputError("no pixel is valid in both maps within the depth range");
  std::size_t same = 0, front = 0, behind = 0;
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    if (!mask.data()[i]) continue;
    const bool gt_front = gt.values().data()[i] < reference;
    const bool pred_front = pred.values().data()[i] < reference;
    if (gt_front == pred_front)
      ++same;
    else if (pred_front)
      ++front;
    else
      ++behind;
  }
  return {100.0 * static_cast<double>(same) / t, 100.0 * static_cast<double>(front) / t,
          100.0 * static_cast<double>(behind) / t};
}

MetricsReport evaluate(const DepthMap& pred, const DepthMap& gt, const EvaluationOptions& options) {
  MetricsReport report = basic_metrics(pred, gt, options.range);
  if (options.camera && !options.regions.empty()) {
    try {
      const PlanarityErrors planarity = planarity_errors(pred, gt, *options.camera, options.regions, options.range);
      report.eps_plan = planarity.eps_plan;
      report.eps_orie = planarity.eps_orie;
    } catch (const DegenerateInputError&) {
      // Every region was degenerate: leave the planarity fields absent.
    }
  }
  const BoundaryErrors boundary = boundary_errors(pred, gt, options.edge_threshold, options.range);
  report.eps_acc = boundary.eps_acc;
  report.eps_comp = boundary.eps_comp;
  const DirectedErrors directed = directed_depth_errors(pred, gt, options.reference_depth, options.range);
  report.eps_0 = directed.eps_0;
  report.eps_minus = directed.eps_minus;
  report.eps_plus = directed.eps_plus;
  return report;
}

}  // namespace dav
