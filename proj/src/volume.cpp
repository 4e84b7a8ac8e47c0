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

#include "davkit/volume.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "davkit/errors.hpp"

namespace dav {

namespace {

struct Sample {
  int v;
  int u;
};

// Nearest valid pixel by Euclidean distance; ties go to the first in
// row-major order. Rings of growing Chebyshev radius are scanned until no
// closer pixel can exist.
std::optional<Sample> nearest_valid(const DepthMap& depth, int v0, int u0) {
  if (depth.is_valid(v0, u0)) return Sample{v0, u0};
  const int max_radius = std::max(depth.height(), depth.width());
  std::optional<Sample> best;
  long best_d2 = std::numeric_limits<long>::max();
  for (int r = 1; r <= max_radius; ++r) {
    if (best && static_cast<long>(r) * r > best_d2) break;
    for (int v = v0 - r; v <= v0 + r; ++v) {
      if (v < 0 || v >= depth.height()) continue;
      const bool edge_row = (v == v0 - r || v == v0 + r);
      for (int u = u0 - r; u <= u0 + r; u += edge_row ? 1 : 2 * r) {
        if (u < 0 || u >= depth.width() || !depth.is_valid(v, u)) continue;
        const long d2 = static_cast<long>(v - v0) * (v - v0) + static_cast<long>(u - u0) * (u - u0);
        if (!best || d2 < best_d2 || (d2 == best_d2 && (v < best->v || (v == best->v && u < best->u)))) {
          best = Sample{v, u};
          best_d2 = d2;
        }
      }
    }
  }
  return best;
}

DAVolume empty_volume(const SubsampledGrid& grid, DavVariant variant) {
  DAVolume out;
  out.h = grid.h;
  out.w = grid.w;
  out.variant = variant;
  out.values.resize(grid.h * grid.w, grid.h * grid.w);
  return out;
}

}  // namespace

std::string_view to_string(DavVariant variant) {
  return variant == DavVariant::Literal ? "literal" : "rescaled";
}

DavVariant parse_variant(std::string_view name) {
  if (name == "literal") return DavVariant::Literal;
  if (name == "rescaled") return DavVariant::Rescaled;
  throw ConfigurationError("unknown DAV variant '" + std::string(name) + "'");
}

double max_score(DavVariant variant) { return variant == DavVariant::Literal ? 0.5 : 1.0; }

double attention_score(double argument, DavVariant variant) {
  // 1 - sigmoid(a) == 1 / (1 + exp(a)), without the cancellation for large a.
  const double s = 1.0 / (1.0 + std::exp(argument));
  return variant == DavVariant::Literal ? s : 2.0 * s;
}

void DavConfig::validate() const {
  ransac.validate();
  if (factor < 1) throw ConfigurationError("subsampling factor must be >= 1");
}

SubsampledGrid subsample(const DepthMap& depth, int factor) {
  if (factor < 1) throw ConfigurationError("subsampling factor must be >= 1");
  if (depth.height() < factor || depth.width() < factor)
    throw ConfigurationError("image " + std::to_string(depth.width()) + "x" + std::to_string(depth.height()) +
                             " is smaller than the subsampling factor " + std::to_string(factor));
  SubsampledGrid grid;
  grid.factor = factor;
  grid.full_height = depth.height();
  grid.full_width = depth.width();
  grid.h = depth.height() / factor;
  grid.w = depth.width() / factor;
  grid.depths.resize(grid.h, grid.w);
  grid.xs.resize(grid.h, grid.w);
  grid.ys.resize(grid.h, grid.w);
  for (int i = 0; i < grid.h; ++i) {
    for (int j = 0; j < grid.w; ++j) {
      const auto s = nearest_valid(depth, i * factor + factor / 2, j * factor + factor / 2);
      if (!s) throw DegenerateInputError("depth map has no valid pixel to sample");
      grid.depths(i, j) = depth(s->v, s->u);
      grid.xs(i, j) = (s->u + 0.5) / depth.width();
      grid.ys(i, j) = (s->v + 0.5) / depth.height();
    }
  }
  return grid;
}

DAVolume dav_zero_order(const SubsampledGrid& grid, DavVariant variant) {
  DAVolume out = empty_volume(grid, variant);
  const int n = out.cells();
  for (int p = 0; p < n; ++p) {
    const double dp = grid.depths(p / grid.w, p % grid.w);
    for (int q = p; q < n; ++q) {
      const double s = attention_score(std::abs(dp - grid.depths(q / grid.w, q % grid.w)), variant);
      out.values(p, q) = s;
      out.values(q, p) = s;
    }
  }
  return out;
}

DAVolume dav_first_order(const SubsampledGrid& grid, const Plane& plane, DavVariant variant) {
  DAVolume out = empty_volume(grid, variant);
  const int n = out.cells();
  const Eigen::Vector4d s = plane.coefficients();
  Eigen::VectorXd distance(n);
  for (int p = 0; p < n; ++p) distance(p) = std::abs(s.dot(grid.homogeneous(p / grid.w, p % grid.w)));
  for (int p = 0; p < n; ++p) {
    for (int q = p; q < n; ++q) {
      const double score = attention_score(distance(p) + distance(q), variant);
      out.values(p, q) = score;
      out.values(q, p) = score;
    }
  }
  return out;
}

DAVolume dav_combine(std::span<const DAVolume> volumes) {
  if (volumes.empty()) throw ConfigurationError("cannot combine an empty list of volumes");
  DAVolume out = volumes.front();
  for (const auto& v : volumes.subspan(1)) {
    if (v.h != out.h || v.w != out.w) throw ConfigurationError("volumes differ in grid shape");
    if (v.variant != out.variant) throw ConfigurationError("volumes differ in variant");
    out.values = out.values.cwiseMax(v.values);
  }
  return out;
}

std::vector<PixelPoint> image_space_points(const DepthMap& depth) {
  std::vector<PixelPoint> points;
  points.reserve(depth.valid_count());
  const double w = depth.width();
  const double h = depth.height();
  for (int v = 0; v < depth.height(); ++v)
    for (int u = 0; u < depth.width(); ++u)
      if (depth.is_valid(v, u))
        points.push_back({Point3((u + 0.5) / w, (v + 0.5) / h, depth(v, u)), v * depth.width() + u});
  return points;
}

GroundTruthDav ground_truth_dav(const DepthMap& depth, const DavConfig& cfg) {
  cfg.validate();
  const SubsampledGrid grid = subsample(depth, cfg.factor);
  GroundTruthDav out;
  if (cfg.ransac.max_planes > 0)
    out.planes = extract_planes(image_space_points(depth), depth.pixel_count(), cfg.ransac);

  std::vector<DAVolume> volumes;
  volumes.reserve(out.planes.size() + 1);
  volumes.push_back(dav_zero_order(grid, cfg.variant));
  for (const auto& plane : out.planes) volumes.push_back(dav_first_order(grid, plane.plane, cfg.variant));
  out.volume = dav_combine(volumes);
  return out;
}

Eigen::ArrayXXd attention_slice(const DAVolume& dav, int query_row, int query_col) {
  if (query_row < 0 || query_row >= dav.h || query_col < 0 || query_col >= dav.w)
    throw BoundsError("query (" + std::to_string(query_row) + ", " + std::to_string(query_col) +
                      ") outside the " + std::to_string(dav.h) + "x" + std::to_string(dav.w) + " grid");
  const int p = dav.flat(query_row, query_col);
  Eigen::ArrayXXd map(dav.h, dav.w);
  for (int i = 0; i < dav.h; ++i)
    for (int j = 0; j < dav.w; ++j) map(i, j) = dav.values(p, dav.flat(i, j));
  return map;
}

}  // namespace dav
