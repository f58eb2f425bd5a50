#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pointflow/core/binary_io.hpp"

namespace pointflow::scene {

inline constexpr std::size_t kSceneFeatureWidth = 5;

/// linearity, planarity, eigen sum, eigen entropy, motion distance (meters).
using SceneFeature = std::array<double, kSceneFeatureWidth>;

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // go left when x[feature] < threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;         // leaf log-odds increment
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(const SceneFeature& x) const;
  std::size_t split_count() const;
  std::size_t leaf_count() const;
};

struct GbtConfig {
  std::size_t num_trees = 100;
  std::size_t max_depth = 3;
  double learning_rate = 0.1;
  double l2_regularization = 1.0;
  double min_child_hessian = 1e-6;
  std::uint64_t seed = 0;  // no subsampling; kept so runs are fully specified
};

/// Binary classifier: p = sigmoid(base_score + learning_rate * Σ tree(x)).
struct GbtModel {
  double base_score = 0.0;
  double learning_rate = 0.1;
  std::size_t max_depth = 3;
  std::vector<RegressionTree> trees;

  double margin(const SceneFeature& x) const;
  double predict_proba(const SceneFeature& x) const;
};

/// Logistic-loss gradient boosting with exact greedy second-order splits.
/// Throws SingleClassData unless both labels occur, LengthMismatch when the
/// row and label counts differ.
GbtModel gbt_fit(std::span<const SceneFeature> rows, std::span<const std::uint8_t> labels,
                 const GbtConfig& config = {});

void write_gbt_model(io::ByteWriter& out, const GbtModel& model);
GbtModel read_gbt_model(io::ByteReader& in);
void save_gbt_model(const std::filesystem::path& path, const GbtModel& model);
GbtModel load_gbt_model(const std::filesystem::path& path);

}  // namespace pointflow::scene
