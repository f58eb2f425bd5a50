#include "pointflow/harness/training.hpp"

#include "pointflow/features/eigen_features.hpp"
#include "pointflow/sceneclass/scene_classifier.hpp"

namespace pointflow::harness {

LabeledRows classifier_rows(const SyntheticScene& scene, const Settings& settings) {
  const std::size_t k = settings.pipeline.ego.eigen_neighbors;
  const auto eigen_t = features::eigen_features(scene.x_t, k);
  const auto eigen_t1 = features::eigen_features(scene.x_t1, k);
  const PointCloud warped = apply_transform(scene.x_t, scene.gt_ego);
  LabeledRows out;
  out.rows = scene::scene_pair_features(warped, scene.x_t1, eigen_t, eigen_t1, settings.pipeline.scene.voxel_size);
  out.labels = scene.gt_labels_t;
  out.labels.insert(out.labels.end(), scene.gt_labels_t1.begin(), scene.gt_labels_t1.end());
  return out;
}

TrainedModels train_models(std::span<const SyntheticScene> scenes, const Settings& settings) {
  std::vector<PointCloud> clouds;
  LabeledRows all;
  for (const auto& s : scenes) {
    clouds.push_back(s.x_t);
    auto rows = classifier_rows(s, settings);
    all.rows.insert(all.rows.end(), rows.rows.begin(), rows.rows.end());
    all.labels.insert(all.labels.end(), rows.labels.begin(), rows.labels.end());
  }
  TrainedModels m;
  m.hop = features::hopmodel_fit(clouds, settings.hop);
  m.gbt = scene::gbt_fit(all.rows, all.labels, settings.gbt);
  return m;
}

TrainedModels train_synthetic(std::span<const std::uint64_t> seeds, const Settings& settings) {
  std::vector<SyntheticScene> scenes;
  scenes.reserve(seeds.size());
  for (auto seed : seeds) scenes.push_back(generate_scene(seed, settings.scene));
  return train_models(scenes, settings);
}

}  // namespace pointflow::harness
