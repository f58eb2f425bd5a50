#include "pointflow/core/voxel_grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pointflow/core/error.hpp"

namespace pointflow {

VoxelKey voxel_key(const Point3& p, double voxel_size) {
  return {static_cast<std::int64_t>(std::floor(p.x() / voxel_size)),
          static_cast<std::int64_t>(std::floor(p.y() / voxel_size)),
          static_cast<std::int64_t>(std::floor(p.z() / voxel_size))};
}

std::ptrdiff_t VoxelGrid::find(const VoxelKey& key) const {
  auto it = std::lower_bound(cells_.begin(), cells_.end(), key,
                             [](const VoxelCell& c, const VoxelKey& k) { return c.key < k; });
  if (it == cells_.end() || it->key != key) return -1;
  return it - cells_.begin();
}

std::vector<Point3> VoxelGrid::centroids() const {
  std::vector<Point3> out;
  out.reserve(cells_.size());
  for (const auto& c : cells_) out.push_back(c.centroid);
  return out;
}

VoxelGrid voxelize(const PointCloud& cloud, double voxel_size) {
  if (!(voxel_size > 0.0)) throw Error(ErrorCode::kInvalidArgument, "voxel size must be > 0");
  std::map<VoxelKey, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    groups[voxel_key(cloud[i], voxel_size)].push_back(i);
  }
  VoxelGrid grid;
  grid.voxel_size_ = voxel_size;
  grid.point_cell_.resize(cloud.size());
  grid.cells_.reserve(groups.size());
  for (auto& [key, members] : groups) {
    VoxelCell cell;
    cell.key = key;
    cell.count = members.size();
    for (std::size_t i : members) {
      cell.centroid += cloud[i];
      grid.point_cell_[i] = grid.cells_.size();
    }
    cell.centroid /= static_cast<double>(members.size());
    cell.members = std::move(members);
    grid.cells_.push_back(std::move(cell));
  }
  return grid;
}

}  // namespace pointflow
