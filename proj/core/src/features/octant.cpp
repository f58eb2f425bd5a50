#include "pointflow/features/octant.hpp"

#include <array>

namespace pointflow::features {

int octant_of(const Point3& offset) {
  return (offset.x() >= 0.0 ? 1 : 0) | (offset.y() >= 0.0 ? 2 : 0) | (offset.z() >= 0.0 ? 4 : 0);
}

Eigen::VectorXd octant_pool(std::span<const Point3> offsets,
                            const Eigen::Ref<const RowMatrix>& attributes) {
  const Eigen::Index width = attributes.cols();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(8 * width);
  std::array<int, 8> counts{};
  for (std::size_t j = 0; j < offsets.size(); ++j) {
    const int o = octant_of(offsets[j]);
    out.segment(o * width, width) += attributes.row(static_cast<Eigen::Index>(j)).transpose();
    ++counts[o];
  }
  for (int o = 0; o < 8; ++o) {
    if (counts[o] > 0) out.segment(o * width, width) /= static_cast<double>(counts[o]);
  }
  return out;
}

std::vector<std::size_t> descriptor_neighbors(const KdIndex& index, std::size_t point,
                                              std::size_t k) {
  std::vector<std::size_t> out;
  if (index.size() <= 1 || k == 0) return out;
  const auto found = index.knn(index.point(point), k + 1);
  out.reserve(k);
  for (const auto& n : found) {
    if (n.index == point) continue;
    if (out.size() == k) break;
    out.push_back(n.index);
  }
  return out;
}

Eigen::VectorXd octant_descriptor(const PointCloud& cloud, const Eigen::Ref<const RowMatrix>& extra,
                                  const KdIndex& index, std::size_t point, std::size_t k) {
  const auto neighbors = descriptor_neighbors(index, point, k);
  const Eigen::Index width = 3 + extra.cols();
  std::vector<Point3> offsets;
  offsets.reserve(neighbors.size());
  RowMatrix attrs(static_cast<Eigen::Index>(neighbors.size()), width);
  for (std::size_t j = 0; j < neighbors.size(); ++j) {
    const Point3 offset = cloud[neighbors[j]] - cloud[point];
    offsets.push_back(offset);
    const auto row = static_cast<Eigen::Index>(j);
    attrs.row(row).head<3>() = offset.transpose();
    if (extra.cols() > 0) {
      attrs.row(row).tail(extra.cols()) = extra.row(static_cast<Eigen::Index>(neighbors[j]));
    }
  }
  return octant_pool(offsets, attrs);
}

}  // namespace pointflow::features
