#include "pointflow/sceneclass/scene_classifier.hpp"

#include <algorithm>
#include <cmath>

#include "pointflow/core/binary_io.hpp"
#include "pointflow/core/error.hpp"
#include "pointflow/core/kd_index.hpp"

namespace pointflow::scene {

std::size_t SceneLabeling::moving_count() const {
  return static_cast<std::size_t>(std::count(moving.begin(), moving.end(), std::uint8_t{1}));
}

std::vector<double> motion_feature(const PointCloud& src, const VoxelGrid& other_grid) {
  if (other_grid.cells().empty()) throw Error(ErrorCode::kEmptyGrid, "other cloud has no occupied voxels");
  const auto centroids = other_grid.centroids();
  const KdIndex index(centroids);
  std::vector<double> out(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    out[i] = std::sqrt(index.nearest(src[i])->squared_distance);
  }
  return out;
}

std::vector<SceneFeature> scene_features(const std::vector<features::EigenFeatures>& eigen,
                                         const std::vector<double>& motion) {
  if (eigen.size() != motion.size()) {
    throw Error(ErrorCode::kLengthMismatch, "eigen and motion features differ in length");
  }
  std::vector<SceneFeature> rows(eigen.size());
  for (std::size_t i = 0; i < eigen.size(); ++i) {
    const auto& e = eigen[i];
    rows[i] = {e.linearity, e.planarity, e.eigen_sum, e.eigen_entropy, motion[i]};
  }
  return rows;
}

SceneLabeling predict_labels(const GbtModel& model, const std::vector<SceneFeature>& rows,
                             double threshold) {
  SceneLabeling out;
  out.moving.resize(rows.size());
  out.probability.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.probability[i] = model.predict_proba(rows[i]);
    out.moving[i] = out.probability[i] >= threshold ? 1 : 0;
  }
  return out;
}

std::vector<SceneFeature> scene_pair_features(const PointCloud& x_t_warped, const PointCloud& x_t1,
                                              const std::vector<features::EigenFeatures>& eigen_t,
                                              const std::vector<features::EigenFeatures>& eigen_t1,
                                              double voxel_size) {
  const VoxelGrid grid_t = voxelize(x_t_warped, voxel_size);
  const VoxelGrid grid_t1 = voxelize(x_t1, voxel_size);
  auto rows = scene_features(eigen_t, motion_feature(x_t_warped, grid_t1));
  const auto rows_t1 = scene_features(eigen_t1, motion_feature(x_t1, grid_t));
  rows.insert(rows.end(), rows_t1.begin(), rows_t1.end());
  return rows;
}

std::pair<SceneLabeling, SceneLabeling> classify_scene(
    const PointCloud& x_t_warped, const PointCloud& x_t1,
    const std::vector<features::EigenFeatures>& eigen_t,
    const std::vector<features::EigenFeatures>& eigen_t1, const GbtModel& model,
    const SceneClassConfig& config) {
  const auto rows = scene_pair_features(x_t_warped, x_t1, eigen_t, eigen_t1, config.voxel_size);
  const auto split = static_cast<std::ptrdiff_t>(x_t_warped.size());
  const std::vector<SceneFeature> rows_t(rows.begin(), rows.begin() + split);
  const std::vector<SceneFeature> rows_t1(rows.begin() + split, rows.end());
  return {predict_labels(model, rows_t, config.threshold), predict_labels(model, rows_t1, config.threshold)};
}

std::vector<std::uint8_t> load_labels(const std::filesystem::path& path, std::size_t expected_points) {
  auto bytes = io::read_file(path);
  if (bytes.size() < expected_points) {
    throw Error(ErrorCode::kTruncatedRecord, "label file has " + std::to_string(bytes.size()) +
                                                 " bytes, expected " + std::to_string(expected_points));
  }
  if (bytes.size() > expected_points) {
    throw Error(ErrorCode::kMalformedFile, "label file longer than the point count (byte offset " +
                                               std::to_string(expected_points) + ")");
  }
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (bytes[i] > 1) {
      throw Error(ErrorCode::kMalformedFile, "label byte other than 0/1 at byte offset " + std::to_string(i));
    }
  }
  return bytes;
}

void save_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels) {
  io::write_file(path, labels);
}

}  // namespace pointflow::scene
