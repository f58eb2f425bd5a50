#include "pointflow/features/eigen_features.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "pointflow/core/error.hpp"

namespace pointflow::features {

EigenFeatures eigen_features_from_values(const Point3& values) {
  EigenFeatures ef;
  ef.eigenvalues = values.cwiseMax(0.0);
  const double l1 = ef.eigenvalues[0];
  const double l2 = ef.eigenvalues[1];
  const double l3 = ef.eigenvalues[2];
  if (!(l1 > 0.0)) {
    ef.eigenvalues.setZero();
    ef.degenerate = true;
    return ef;
  }
  ef.linearity = (l1 - l2) / l1;
  ef.planarity = (l2 - l3) / l1;
  ef.eigen_sum = l1 + l2 + l3;
  for (int i = 0; i < 3; ++i) {
    const double normalized = ef.eigenvalues[i] / ef.eigen_sum;
    if (normalized > 0.0) ef.eigen_entropy -= normalized * std::log(normalized);
  }
  return ef;
}

std::vector<EigenFeatures> eigen_features(const PointCloud& cloud, std::size_t k) {
  if (cloud.empty()) throw Error(ErrorCode::kInvalidArgument, "eigen_features on empty cloud");
  const KdIndex index(cloud);
  return eigen_features(cloud, index, k);
}

std::vector<EigenFeatures> eigen_features(const PointCloud& cloud, const KdIndex& index,
                                          std::size_t k) {
  if (k < 3 || k > cloud.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "eigen_features needs 3 <= k <= n (k=" + std::to_string(k) +
                    ", n=" + std::to_string(cloud.size()) + ")");
  }
  std::vector<EigenFeatures> out(cloud.size());
  Eigen::SelfAdjointEigenSolver<Matrix3> solver;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto neighbors = index.knn(cloud[i], k);
    Point3 mean = Point3::Zero();
    for (const auto& n : neighbors) mean += index.point(n.index);
    mean /= static_cast<double>(neighbors.size());
    Matrix3 cov = Matrix3::Zero();
    for (const auto& n : neighbors) {
      const Point3 d = index.point(n.index) - mean;
      cov += d * d.transpose();
    }
    cov /= static_cast<double>(neighbors.size());
    solver.compute(cov, Eigen::EigenvaluesOnly);
    const Point3 ascending = solver.eigenvalues();
    out[i] = eigen_features_from_values(ascending.reverse());
  }
  return out;
}

}  // namespace pointflow::features
