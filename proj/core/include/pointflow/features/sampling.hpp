#pragma once

#include <vector>

#include "pointflow/core/types.hpp"
#include "pointflow/features/eigen_features.hpp"

namespace pointflow::features {

struct SamplingConfig {
  std::size_t azimuth_bins = 8;
  std::size_t range_bins = 4;
  /// Outer edge of the range bins in meters; <= 0 uses the cloud's max range.
  double max_range = 0.0;
};

/// Bin id (azimuth-major) of a point under the sampling grid.
std::size_t sampling_bin(const Point3& p, const SamplingConfig& config, double max_range);

/// Geometry-aware sampling: points are binned by azimuth x horizontal range,
/// ranked inside each bin by linearity + planarity (ties to lower index), and
/// taken round-robin across bins until m are selected. Degenerate points are
/// never selected. Returns ascending indices.
std::vector<std::size_t> geometry_aware_sample(const PointCloud& cloud, std::size_t m,
                                               const std::vector<EigenFeatures>& eigen,
                                               const SamplingConfig& config = {});

}  // namespace pointflow::features
