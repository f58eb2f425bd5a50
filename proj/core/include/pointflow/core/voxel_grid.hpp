#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pointflow/core/types.hpp"

namespace pointflow {

/// Integer cell coordinate: floor(coord / size) per axis, anchored at the origin.
struct VoxelKey {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;

  friend auto operator<=>(const VoxelKey&, const VoxelKey&) = default;
};

VoxelKey voxel_key(const Point3& p, double voxel_size);

struct VoxelCell {
  VoxelKey key;
  Point3 centroid = Point3::Zero();
  std::size_t count = 0;
  std::vector<std::size_t> members;  // ascending point indices
};

/// Occupied cells sorted by key, plus the cell of every input point.
class VoxelGrid {
 public:
  VoxelGrid() = default;

  double voxel_size() const noexcept { return voxel_size_; }
  const std::vector<VoxelCell>& cells() const noexcept { return cells_; }
  std::size_t cell_of(std::size_t point) const { return point_cell_[point]; }
  std::size_t point_count() const noexcept { return point_cell_.size(); }

  /// Index into cells() or -1 when the cell is empty.
  std::ptrdiff_t find(const VoxelKey& key) const;

  std::vector<Point3> centroids() const;

  friend VoxelGrid voxelize(const PointCloud& cloud, double voxel_size);

 private:
  double voxel_size_ = 0.0;
  std::vector<VoxelCell> cells_;
  std::vector<std::size_t> point_cell_;
};

/// Throws InvalidArgument unless voxel_size > 0.
VoxelGrid voxelize(const PointCloud& cloud, double voxel_size);

}  // namespace pointflow
