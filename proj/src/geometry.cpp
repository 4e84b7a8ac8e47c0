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

#include "davkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include "davkit/errors.hpp"

namespace dav {

namespace {

// Sobel weights, correlation form, indexed [dv + 1][du + 1].
constexpr double kSobelX[3][3] = {{-1.0 / 8, 0.0, 1.0 / 8}, {-2.0 / 8, 0.0, 2.0 / 8}, {-1.0 / 8, 0.0, 1.0 / 8}};
constexpr double kSobelY[3][3] = {{-1.0 / 8, -2.0 / 8, -1.0 / 8}, {0.0, 0.0, 0.0}, {1.0 / 8, 2.0 / 8, 1.0 / 8}};

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

}  // namespace

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw ConfigurationError("focal lengths must be positive");
  if (width <= 0 || height <= 0) throw ConfigurationError("image size must be positive");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
    throw ConfigurationError("principal point outside the image");
}

DepthMap::DepthMap(Eigen::ArrayXXd values) : values_(std::move(values)) {
  valid_ = values_.unaryExpr([](double d) { return std::isfinite(d) && d > 0.0; });
}

DepthMap::DepthMap(Eigen::ArrayXXd values, Mask valid) : values_(std::move(values)), valid_(std::move(valid)) {
  if (values_.rows() != valid_.rows() || values_.cols() != valid_.cols())
    throw ConfigurationError("depth values and validity mask differ in shape");
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    const double d = values_.data()[i];
    if (valid_.data()[i] && !(std::isfinite(d) && d > 0.0))
      throw ConfigurationError("valid depth sample must be finite and positive");
  }
}

Plane Plane::through(const Point3& anchor, const Eigen::Vector3d& normal) {
  const double norm = normal.norm();
  if (!(norm > 0.0)) throw DegenerateInputError("plane normal has zero length");
  Plane plane;
  plane.normal = normal / norm;
  plane.offset = -plane.normal.dot(anchor);
  return plane;
}

std::optional<Plane> Plane::from_points(const Point3& a, const Point3& b, const Point3& c, double min_area) {
  const Eigen::Vector3d cross = (b - a).cross(c - a);
  if (!(0.5 * cross.norm() > min_area)) return std::nullopt;
  return through(a, cross);
}

std::vector<PixelPoint> back_project(const DepthMap& depth, const CameraIntrinsics& camera) {
  camera.validate();
  if (depth.width() != camera.width || depth.height() != camera.height)
    throw ConfigurationError("depth map is " + std::to_string(depth.width()) + "x" + std::to_string(depth.height()) +
                             " but intrinsics describe " + std::to_string(camera.width) + "x" +
                             std::to_string(camera.height));
  std::vector<PixelPoint> points;
  points.reserve(depth.valid_count());
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      if (!depth.is_valid(v, u)) continue;
      const double z = depth(v, u);
      points.push_back({Point3((u - camera.cx) * z / camera.fx, (v - camera.cy) * z / camera.fy, z),
                        v * depth.width() + u});
    }
  }
  return points;
}

Plane fit_plane_lsq(std::span<const Point3> points) {
  if (points.size() < 3) throw DegenerateInputError("plane fit needs at least 3 points");
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Eigen::Vector3d d = p - centroid;
    covariance.noalias() += d * d.transpose();
  }
  covariance /= static_cast<double>(points.size());

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(covariance);
  const Eigen::Vector3d& lambda = solver.eigenvalues();  // ascending
  if (!(lambda(2) > 0.0) || lambda(1) <= 1e-10 * lambda(2))
    throw DegenerateInputError("plane fit input is collinear or coincident");

  Plane plane;
  plane.normal = solver.eigenvectors().col(0).normalized();
  plane.offset = -plane.normal.dot(centroid);
  // Orient the normal towards the origin; break the through-origin case on
  // the dominant component.
  Eigen::Index dominant = 0;
  plane.normal.cwiseAbs().maxCoeff(&dominant);
  if (plane.offset < 0.0 || (plane.offset == 0.0 && plane.normal(dominant) < 0.0)) plane = plane.flipped();
  return plane;
}

SobelGradient sobel_gradient(const Eigen::ArrayXXd& field) {
  const int rows = static_cast<int>(field.rows());
  const int cols = static_cast<int>(field.cols());
  SobelGradient g{Eigen::ArrayXXd::Zero(rows, cols), Eigen::ArrayXXd::Zero(rows, cols)};
  for (int v = 0; v < rows; ++v) {
    for (int u = 0; u < cols; ++u) {
      double gx = 0.0;
      double gy = 0.0;
      for (int dv = -1; dv <= 1; ++dv) {
        for (int du = -1; du <= 1; ++du) {
          const double f = field(clamp_index(v + dv, rows), clamp_index(u + du, cols));
          gx += kSobelX[dv + 1][du + 1] * f;
          gy += kSobelY[dv + 1][du + 1] * f;
        }
      }
      g.dx(v, u) = gx;
      g.dy(v, u) = gy;
    }
  }
  return g;
}

Eigen::ArrayXXd sobel_gradient_adjoint(const Eigen::ArrayXXd& grad_dx, const Eigen::ArrayXXd& grad_dy) {
  const int rows = static_cast<int>(grad_dx.rows());
  const int cols = static_cast<int>(grad_dx.cols());
  if (grad_dy.rows() != rows || grad_dy.cols() != cols)
    throw ConfigurationError("sobel adjoint: gradient shapes differ");
  Eigen::ArrayXXd out = Eigen::ArrayXXd::Zero(rows, cols);
  for (int v = 0; v < rows; ++v) {
    for (int u = 0; u < cols; ++u) {
      const double gx = grad_dx(v, u);
      const double gy = grad_dy(v, u);
      if (gx == 0.0 && gy == 0.0) continue;
      for (int dv = -1; dv <= 1; ++dv) {
        for (int du = -1; du <= 1; ++du) {
          out(clamp_index(v + dv, rows), clamp_index(u + du, cols)) +=
              kSobelX[dv + 1][du + 1] * gx + kSobelY[dv + 1][du + 1] * gy;
        }
      }
    }
  }
  return out;
}

NormalMap sobel_normals(const DepthMap& depth) {
  const int rows = depth.height();
  const int cols = depth.width();
  NormalMap map;
  map.height = rows;
  map.width = cols;
  map.normals = Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(static_cast<Eigen::Index>(rows) * cols, 3);
  map.set = Mask::Constant(rows, cols, false);

  const SobelGradient g = sobel_gradient(depth.values());
  for (int v = 0; v < rows; ++v) {
    for (int u = 0; u < cols; ++u) {
      bool neighbourhood_valid = true;
      for (int dv = -1; dv <= 1 && neighbourhood_valid; ++dv)
        for (int du = -1; du <= 1 && neighbourhood_valid; ++du)
          neighbourhood_valid = depth.is_valid(clamp_index(v + dv, rows), clamp_index(u + du, cols));
      if (!neighbourhood_valid) continue;
      const Eigen::Vector3d n(-g.dx(v, u), -g.dy(v, u), 1.0);
      map.normals.row(v * cols + u) = n.normalized().transpose();
      map.set(v, u) = true;
    }
  }
  return map;
}

}  // namespace dav
