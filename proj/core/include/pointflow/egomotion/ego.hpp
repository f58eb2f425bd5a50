#pragma once

#include <array>
#include <vector>

#include "pointflow/core/rigid.hpp"
#include "pointflow/core/types.hpp"
#include "pointflow/features/eigen_features.hpp"
#include "pointflow/features/hop_model.hpp"
#include "pointflow/features/sampling.hpp"

namespace pointflow::ego {

enum class View : int { kFront = 0, kLeft = 1, kRear = 2, kRight = 3 };

/// Azimuth sectors: front [-45°, 45°), left [45°, 135°), rear [135°, 180°] ∪
/// [-180°, -135°), right [-135°, -45°).
View view_of(const Point3& p);

struct ViewPartition {
  std::array<std::vector<std::size_t>, 4> views;  // indexed by View

  const std::vector<std::size_t>& operator[](View v) const { return views[static_cast<int>(v)]; }
};

ViewPartition partition_views(const PointCloud& cloud, std::span<const std::size_t> indices);

struct EgoConfig {
  std::size_t sample_size = 1024;
  std::size_t top_matches = 256;  // pooled over the four views, split evenly
  double ratio_max = 0.9;
  std::size_t eigen_neighbors = 16;
  features::SamplingConfig sampling;
  /// Drop the worst `trim_fraction` residual pairs and re-align once.
  bool trimmed_second_pass = false;
  /// Sample consensus over the pooled pairs before the final alignment.
  ConsensusConfig consensus;
  double trim_fraction = 0.2;
};

struct EgoEstimate {
  RigidTransform transform;      // maps X_t coordinates into the X_{t+1} frame
  CorrespondenceSet inliers;     // indices into X_t and X_{t+1}
  double residual_rms = 0.0;     // meters, over inliers
};

/// Single feature-matching iteration: eigen features, geometry-aware sampling,
/// view partition, hop features, per-view matching, pooled Procrustes.
///
/// Throws InsufficientSamples when either cloud has fewer usable points than
/// sample_size; NoCorrespondences and DegenerateCorrespondences propagate.
EgoEstimate estimate_ego(const PointCloud& x_t, const PointCloud& x_t1,
                         const features::HopModel& model, const EgoConfig& config = {});

/// Same, with eigen features already computed for both clouds.
EgoEstimate estimate_ego(const PointCloud& x_t, const PointCloud& x_t1,
                         const std::vector<features::EigenFeatures>& eigen_t,
                         const std::vector<features::EigenFeatures>& eigen_t1,
                         const features::HopModel& model, const EgoConfig& config = {});

/// Warps X_t into the X_{t+1} frame; point order is unchanged.
PointCloud compensate(const PointCloud& x_t, const EgoEstimate& ego);

}  // namespace pointflow::ego
