#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <vector>

namespace pointflow {

using Point3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

/// Ordered set of finite 3D points. Index i keeps its identity through warping.
class PointCloud {
 public:
  PointCloud() = default;
  /// Throws InvalidArgument if any coordinate is NaN or infinite.
  explicit PointCloud(std::vector<Point3> points);

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }

  const Point3& operator[](std::size_t i) const { return points_[i]; }
  std::span<const Point3> points() const noexcept { return points_; }

  auto begin() const noexcept { return points_.begin(); }
  auto end() const noexcept { return points_.end(); }

  /// Sub-cloud of the given indices, in the given order.
  PointCloud select(std::span<const std::size_t> indices) const;

  Point3 centroid() const;

 private:
  std::vector<Point3> points_;
};

/// SE(3) element: p -> R p + t.
struct RigidTransform {
  Matrix3 rotation = Matrix3::Identity();
  Point3 translation = Point3::Zero();

  static RigidTransform identity() { return {}; }

  Point3 apply(const Point3& p) const { return rotation * p + translation; }
  RigidTransform inverse() const;

  /// RᵀR = I and det R = +1 within `tol`, translation finite.
  bool is_valid(double tol = 1e-9) const;
};

/// Builds a rotation about a unit axis by `angle` radians.
Matrix3 axis_angle(const Point3& axis, double angle);

/// Rotation angle of R in radians, in [0, pi].
double rotation_angle(const Matrix3& rotation);

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& transform);

/// compose(a, b) applies a first, then b (b ∘ a).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

struct Correspondence {
  std::size_t src = 0;
  std::size_t dst = 0;
  double feature_distance = 0.0;
};

using CorrespondenceSet = std::vector<Correspondence>;

}  // namespace pointflow
