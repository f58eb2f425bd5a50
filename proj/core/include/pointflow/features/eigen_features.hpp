#pragma once

#include <vector>

#include "pointflow/core/kd_index.hpp"
#include "pointflow/core/types.hpp"

namespace pointflow::features {

/// Shape descriptors from the eigenvalues l1 >= l2 >= l3 >= 0 of a point's
/// neighborhood covariance.
struct EigenFeatures {
  double linearity = 0.0;      // (l1 - l2) / l1
  double planarity = 0.0;      // (l2 - l3) / l1
  double eigen_sum = 0.0;      // l1 + l2 + l3
  double eigen_entropy = 0.0;  // -Σ l̂ ln l̂ with l̂ = l / Σl, 0 ln 0 := 0
  Point3 eigenvalues = Point3::Zero();  // descending
  bool degenerate = false;     // l1 == 0; every feature is zero

  double saliency() const { return linearity + planarity; }
};

EigenFeatures eigen_features_from_values(const Point3& descending_eigenvalues);

/// Per point: population covariance of its k nearest neighbors (self included),
/// eigen-decomposed. Throws InvalidArgument unless 3 <= k <= n.
std::vector<EigenFeatures> eigen_features(const PointCloud& cloud, std::size_t k);
std::vector<EigenFeatures> eigen_features(const PointCloud& cloud, const KdIndex& index,
                                          std::size_t k);

}  // namespace pointflow::features
