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
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace dav {

using Point3 = Eigen::Vector3d;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Undistorted pinhole camera. Pixel (u, v) is column u, row v.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  /// Throws ConfigurationError when a field is out of range.
  void validate() const;
};

/// Metric depth grid (rows = image rows) with a validity mask. A pixel is
/// valid only if its depth is finite and strictly positive.
class DepthMap {
 public:
  DepthMap() = default;
  /// Validity derived from the values themselves.
  explicit DepthMap(Eigen::ArrayXXd values);
  /// Explicit mask; throws ConfigurationError if a valid pixel is not > 0
  /// or the shapes differ.
  DepthMap(Eigen::ArrayXXd values, Mask valid);

  int height() const { return static_cast<int>(values_.rows()); }
  int width() const { return static_cast<int>(values_.cols()); }
  std::size_t pixel_count() const { return static_cast<std::size_t>(values_.size()); }
  std::size_t valid_count() const { return static_cast<std::size_t>(valid_.count()); }

  double operator()(int v, int u) const { return values_(v, u); }
  bool is_valid(int v, int u) const { return valid_(v, u); }

  const Eigen::ArrayXXd& values() const { return values_; }
  const Mask& valid() const { return valid_; }

 private:
  Eigen::ArrayXXd values_;
  Mask valid_;
};

/// A 3-D point together with the row-major index (v * width + u) of the
/// pixel it came from.
struct PixelPoint {
  Point3 point;
  int index = 0;
};

/// Plane n . p + c = 0 with unit normal n. `signed_distance` is the dot
/// product of (n, c) with the homogeneous point.
struct Plane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 0.0;

  double signed_distance(const Point3& p) const { return normal.dot(p) + offset; }
  Plane flipped() const { return {-normal, -offset}; }
  Eigen::Vector4d coefficients() const { return {normal.x(), normal.y(), normal.z(), offset}; }

  /// Plane through an anchor point with the given (not necessarily unit)
  /// normal.
  static Plane through(const Point3& anchor, const Eigen::Vector3d& normal);
  /// Exact plane through three points, or nullopt when the triangle area is
  /// below `min_area`.
  static std::optional<Plane> from_points(const Point3& a, const Point3& b, const Point3& c,
                                          double min_area = 1e-12);
};

inline double signed_distance(const Plane& plane, const Point3& p) { return plane.signed_distance(p); }

/// Unit normals indexed by pixel (row-major); `set` marks pixels where a
/// normal was emitted.
struct NormalMap {
  int height = 0;
  int width = 0;
  Eigen::Matrix<double, Eigen::Dynamic, 3> normals;
  Mask set;

  Eigen::Vector3d at(int v, int u) const { return normals.row(v * width + u).transpose(); }
};

struct SobelGradient {
  Eigen::ArrayXXd dx;
  Eigen::ArrayXXd dy;
};

std::vector<PixelPoint> back_project(const DepthMap& depth, const CameraIntrinsics& camera);

/// Total least squares fit. Throws DegenerateInputError on fewer than three
/// points or collinear input.
Plane fit_plane_lsq(std::span<const Point3> points);

/// 3x3 Sobel derivatives scaled by 1/8, replicate padding at the border.
/// On d = a*u + b*v + c the interior result is exactly (a, b).
SobelGradient sobel_gradient(const Eigen::ArrayXXd& field);

/// Adjoint of sobel_gradient: maps upstream gradients wrt (dx, dy) to the
/// gradient wrt the input field.
Eigen::ArrayXXd sobel_gradient_adjoint(const Eigen::ArrayXXd& grad_dx, const Eigen::ArrayXXd& grad_dy);

/// normalize(-dx, -dy, 1) wherever the pixel and its clamped 3x3
/// neighbourhood are valid.
NormalMap sobel_normals(const DepthMap& depth);

}  // namespace dav
