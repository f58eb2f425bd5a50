#include "pointflow/core/kd_index.hpp"

#include <algorithm>
#include <numeric>

#include "pointflow/core/error.hpp"

namespace pointflow {

KdIndex::KdIndex(std::span<const Point3> points, std::size_t leaf_size)
    : points_(points.begin(), points.end()), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / leaf_size_ + 1);
    root_ = build(0, static_cast<std::uint32_t>(points_.size()));
  }
}

std::int32_t KdIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= leaf_size_) return id;

  Point3 lo = points_[order_[begin]];
  Point3 hi = lo;
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all points coincide

  const std::uint32_t mid = begin + (end - begin) / 2;
  auto less = [&](std::uint32_t a, std::uint32_t b) {
    const double va = points_[a][axis];
    const double vb = points_[b][axis];
    return va < vb || (va == vb && a < b);
  };
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, less);

  const double split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<Neighbor> KdIndex::knn(const Point3& query, std::size_t k) const {
  if (points_.empty()) throw Error(ErrorCode::kEmptyIndex, "knn on empty index");
  k = std::min(k, points_.size());
  std::vector<Neighbor> heap;
  if (k == 0) return heap;
  heap.reserve(k + 1);
  knn_recurse(root_, query, k, heap);
  std::sort_heap(heap.begin(), heap.end());
  return heap;
}

std::vector<std::size_t> KdIndex::knn_indices(const Point3& query, std::size_t k) const {
  const auto found = knn(query, k);
  std::vector<std::size_t> out(found.size());
  std::transform(found.begin(), found.end(), out.begin(), [](const Neighbor& n) { return n.index; });
  return out;
}

std::optional<Neighbor> KdIndex::nearest(const Point3& query) const {
  if (points_.empty()) return std::nullopt;
  return knn(query, 1).front();
}

void KdIndex::knn_recurse(std::int32_t node_id, const Point3& query, std::size_t k,
                          std::vector<Neighbor>& heap) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t idx = order_[i];
      const Neighbor cand{idx, (points_[idx] - query).squaredNorm()};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }
  const double diff = query[node.axis] - node.split;
  const std::int32_t first = diff < 0.0 ? node.left : node.right;
  const std::int32_t second = diff < 0.0 ? node.right : node.left;
  knn_recurse(first, query, k, heap);
  // <= keeps equal-distance candidates with lower indices reachable.
  if (heap.size() < k || diff * diff <= heap.front().squared_distance) {
    knn_recurse(second, query, k, heap);
  }
}

std::vector<std::size_t> KdIndex::radius_search(const Point3& query, double radius) const {
  std::vector<std::size_t> out;
  if (points_.empty() || radius < 0.0) return out;
  radius_recurse(root_, query, radius * radius, out);
  std::sort(out.begin(), out.end());
  return out;
}

void KdIndex::radius_recurse(std::int32_t node_id, const Point3& query, double r2,
                             std::vector<std::size_t>& out) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t idx = order_[i];
      if ((points_[idx] - query).squaredNorm() <= r2) out.push_back(idx);
    }
    return;
  }
  const double diff = query[node.axis] - node.split;
  const std::int32_t first = diff < 0.0 ? node.left : node.right;
  const std::int32_t second = diff < 0.0 ? node.right : node.left;
  radius_recurse(first, query, r2, out);
  if (diff * diff <= r2) radius_recurse(second, query, r2, out);
}

}  // namespace pointflow
