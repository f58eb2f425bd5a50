#include "pointflow/core/types.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>

#include "pointflow/core/error.hpp"

namespace pointflow {

PointCloud::PointCloud(std::vector<Point3> points) : points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!points_[i].allFinite()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "non-finite coordinate at point " + std::to_string(i));
    }
  }
}

PointCloud PointCloud::select(std::span<const std::size_t> indices) const {
  std::vector<Point3> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(points_.at(i));
  PointCloud result;
  result.points_ = std::move(out);
  return result;
}

Point3 PointCloud::centroid() const {
  Point3 sum = Point3::Zero();
  for (const auto& p : points_) sum += p;
  return points_.empty() ? sum : Point3(sum / static_cast<double>(points_.size()));
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

bool RigidTransform::is_valid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const double ortho = (rotation.transpose() * rotation - Matrix3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

Matrix3 axis_angle(const Point3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

double rotation_angle(const Matrix3& rotation) {
  const double c = std::clamp((rotation.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& transform) {
  std::vector<Point3> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud) out.push_back(transform.apply(p));
  return PointCloud(std::move(out));
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform c;
  c.rotation = b.rotation * a.rotation;
  c.translation = b.rotation * a.translation + b.translation;
  return c;
}

}  // namespace pointflow
