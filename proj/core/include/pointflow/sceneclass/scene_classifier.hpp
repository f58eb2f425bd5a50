#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "pointflow/core/types.hpp"
#include "pointflow/core/voxel_grid.hpp"
#include "pointflow/features/eigen_features.hpp"
#include "pointflow/sceneclass/gbt.hpp"

namespace pointflow::scene {

/// Per-point moving/static decision.
struct SceneLabeling {
  std::vector<std::uint8_t> moving;  // 1 = moving, 0 = static
  std::vector<double> probability;   // classifier output in [0, 1]

  std::size_t size() const { return moving.size(); }
  std::size_t moving_count() const;
};

struct SceneClassConfig {
  double voxel_size = 2.0;
  double threshold = 0.5;
};

/// Distance from each point to the nearest occupied-cell centroid of `other_grid`.
/// Throws EmptyGrid when the grid has no cells.
std::vector<double> motion_feature(const PointCloud& src, const VoxelGrid& other_grid);

std::vector<SceneFeature> scene_features(const std::vector<features::EigenFeatures>& eigen,
                                         const std::vector<double>& motion);

SceneLabeling predict_labels(const GbtModel& model, const std::vector<SceneFeature>& rows,
                             double threshold = 0.5);

/// Builds 5-D shape/motion features for both clouds (X̃_t already in the X_{t+1}
/// frame) and classifies every point. Eigen features are reused from the ego
/// stage; a rigid warp leaves them unchanged.
std::pair<SceneLabeling, SceneLabeling> classify_scene(
    const PointCloud& x_t_warped, const PointCloud& x_t1,
    const std::vector<features::EigenFeatures>& eigen_t,
    const std::vector<features::EigenFeatures>& eigen_t1, const GbtModel& model,
    const SceneClassConfig& config = {});

/// Feature rows for both clouds of a pair, X̃_t rows first.
std::vector<SceneFeature> scene_pair_features(const PointCloud& x_t_warped, const PointCloud& x_t1,
                                              const std::vector<features::EigenFeatures>& eigen_t,
                                              const std::vector<features::EigenFeatures>& eigen_t1,
                                              double voxel_size = 2.0);

/// Label files: one byte per point, 0 = static, 1 = moving.
std::vector<std::uint8_t> load_labels(const std::filesystem::path& path, std::size_t expected_points);
void save_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels);

}  // namespace pointflow::scene
