#pragma once

#include <Eigen/Core>
#include <span>

#include "pointflow/core/kd_index.hpp"
#include "pointflow/core/types.hpp"

namespace pointflow::features {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Octant of `offset` in the global axes: bit 0 = x >= 0, bit 1 = y >= 0, bit 2 = z >= 0.
int octant_of(const Point3& offset);

/// Mean attribute row per octant, octant-major (8 * A values). Empty octants are zero.
/// `attributes` holds one row per entry of `offsets`.
Eigen::VectorXd octant_pool(std::span<const Point3> offsets,
                            const Eigen::Ref<const RowMatrix>& attributes);

/// Octant descriptor of cloud[point] over its k nearest neighbors (the point
/// itself excluded). Per-neighbor attributes are the relative coordinates
/// (neighbor - center) followed by the row of `extra` for that neighbor, so
/// A = 3 + extra.cols(). `extra` may have zero columns.
Eigen::VectorXd octant_descriptor(const PointCloud& cloud, const Eigen::Ref<const RowMatrix>& extra,
                                  const KdIndex& index, std::size_t point, std::size_t k);

/// Neighbors of cloud[point] used by the descriptors: k nearest, self excluded.
std::vector<std::size_t> descriptor_neighbors(const KdIndex& index, std::size_t point,
                                              std::size_t k);

}  // namespace pointflow::features
