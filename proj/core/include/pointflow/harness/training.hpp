#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pointflow/features/hop_model.hpp"
#include "pointflow/harness/config_file.hpp"
#include "pointflow/harness/synthetic.hpp"
#include "pointflow/sceneclass/gbt.hpp"

namespace pointflow::harness {

struct TrainedModels {
  features::HopModel hop;
  scene::GbtModel gbt;
};

struct LabeledRows {
  std::vector<scene::SceneFeature> rows;
  std::vector<std::uint8_t> labels;
};

/// Classifier rows for both scans of a scene, X_t warped by the true ego motion.
LabeledRows classifier_rows(const SyntheticScene& scene, const Settings& settings);

/// Fits the hop model on the X_t scans and the classifier on every point of
/// both scans, for scenes generated from `seeds`.
TrainedModels train_synthetic(std::span<const std::uint64_t> seeds, const Settings& settings);

/// Same, from explicit scans with per-point labels and known ego motions.
TrainedModels train_models(std::span<const SyntheticScene> scenes, const Settings& settings);

}  // namespace pointflow::harness
