#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pointflow/core/types.hpp"

namespace pointflow {

struct Neighbor {
  std::size_t index = 0;
  double squared_distance = 0.0;

  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.squared_distance < b.squared_distance ||
           (a.squared_distance == b.squared_distance && a.index < b.index);
  }
};

/// Balanced kd-tree over a snapshot of points.
///
/// Queries are exact: knn returns the k smallest (distance, index) pairs and
/// radius_search returns every point with distance <= r, sorted by index.
/// Read-only after construction, so concurrent queries are safe.
class KdIndex {
 public:
  KdIndex() = default;
  explicit KdIndex(std::span<const Point3> points, std::size_t leaf_size = 12);
  explicit KdIndex(const PointCloud& cloud, std::size_t leaf_size = 12)
      : KdIndex(cloud.points(), leaf_size) {}

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const Point3& point(std::size_t i) const { return points_[i]; }

  /// Nearest k by (distance, index), ascending. Throws EmptyIndex when n = 0;
  /// k larger than n is clamped to n.
  std::vector<Neighbor> knn(const Point3& query, std::size_t k) const;
  std::vector<std::size_t> knn_indices(const Point3& query, std::size_t k) const;

  std::optional<Neighbor> nearest(const Point3& query) const;

  /// All points within distance r (inclusive), ascending index order.
  std::vector<std::size_t> radius_search(const Point3& query, double radius) const;

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = -1;  // -1 for leaves
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void knn_recurse(std::int32_t node, const Point3& query, std::size_t k,
                   std::vector<Neighbor>& heap) const;
  void radius_recurse(std::int32_t node, const Point3& query, double r2,
                      std::vector<std::size_t>& out) const;

  std::vector<Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::size_t leaf_size_ = 12;
  std::int32_t root_ = -1;
};

}  // namespace pointflow
