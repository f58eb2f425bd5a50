#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pointflow/core/types.hpp"
#include "pointflow/harness/config_file.hpp"
#include "pointflow/harness/metrics.hpp"
#include "pointflow/harness/training.hpp"

namespace pointflow::harness {

struct PoseError {
  double translation = 0.0;   // meters
  double rotation_deg = 0.0;
};

PoseError pose_error(const RigidTransform& estimated, const RigidTransform& truth);

struct SceneOutcome {
  std::uint64_t seed = 0;
  std::size_t points = 0;
  double moving_fraction = 0.0;
  MetricsReport metrics;
  PoseError ego;
  double seconds = 0.0;
  std::size_t motions = 0;
  std::size_t demoted = 0;
  std::string error;  // stage-tagged message when the run threw; metrics then unset
};

struct SuiteReport {
  std::vector<SceneOutcome> scenes;
  double mean_epe3d = 0.0;
  double mean_acc3ds = 0.0;
  double mean_acc3dr = 0.0;
  double mean_outliers = 0.0;
  double mean_mae = 0.0;
  double max_seconds = 0.0;
  std::size_t failures = 0;
};

// Seeds kept apart so evaluation scenes never overlap the training set.
std::vector<std::uint64_t> training_seeds(std::size_t count);
std::vector<std::uint64_t> evaluation_seeds(std::size_t count);

/// Generates each scene, runs the full pipeline with settings.pipeline, and
/// scores it. Failed scenes count as failures and are left out of the means.
SuiteReport evaluate_suite(const TrainedModels& models, const Settings& settings,
                           std::span<const std::uint64_t> seeds);

/// Ego-only run per scene (features or ICP per settings.pipeline.ego_method).
std::vector<PoseError> evaluate_ego(const TrainedModels& models, const Settings& settings,
                                    std::span<const std::uint64_t> seeds);

/// Fraction of points of held-out scenes (both scans) that the classifier labels
/// correctly, with X_t warped by the true ego motion.
double classifier_accuracy(const TrainedModels& models, const Settings& settings,
                           std::span<const std::uint64_t> seeds);

}  // namespace pointflow::harness
