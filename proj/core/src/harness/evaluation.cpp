#include "pointflow/harness/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <numbers>

#include "pointflow/core/error.hpp"
#include "pointflow/egomotion/ego.hpp"
#include "pointflow/features/eigen_features.hpp"
#include "pointflow/flow/pipeline.hpp"
#include "pointflow/sceneclass/scene_classifier.hpp"

namespace pointflow::harness {

PoseError pose_error(const RigidTransform& estimated, const RigidTransform& truth) {
  PoseError e;
  e.translation = (estimated.translation - truth.translation).norm();
  e.rotation_deg = rotation_angle(estimated.rotation.transpose() * truth.rotation) * 180.0 / std::numbers::pi;
  return e;
}

std::vector<std::uint64_t> training_seeds(std::size_t count) {
  std::vector<std::uint64_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = 1000 + i;
  return out;
}

std::vector<std::uint64_t> evaluation_seeds(std::size_t count) {
  std::vector<std::uint64_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = 1 + i;
  return out;
}

SuiteReport evaluate_suite(const TrainedModels& models, const Settings& settings,
                           std::span<const std::uint64_t> seeds) {
  SuiteReport report;
  std::size_t ok = 0;
  for (auto seed : seeds) {
    const SyntheticScene scene = generate_scene(seed, settings.scene);
    SceneOutcome o;
    o.seed = seed;
    o.points = scene.x_t.size();
    o.moving_fraction = scene.moving_fraction();
    try {
      const auto start = std::chrono::steady_clock::now();
      const auto r = flow::run_pipeline(scene.x_t, scene.x_t1, models.hop, models.gbt, settings.pipeline);
      o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      o.metrics = compute_metrics(r.flow, scene);
      o.ego = pose_error(r.ego.transform, scene.gt_ego);
      o.motions = r.motions.size();
      o.demoted = r.demoted.size();
      report.mean_epe3d += o.metrics.epe3d;
      report.mean_acc3ds += o.metrics.acc3ds;
      report.mean_acc3dr += o.metrics.acc3dr;
      report.mean_outliers += o.metrics.outlier_frac;
      report.mean_mae += o.metrics.mae;
      ++ok;
    } catch (const StageError& e) {
      o.error = e.stage() + ": " + e.what();
      ++report.failures;
    }
    report.max_seconds = std::max(report.max_seconds, o.seconds);
    report.scenes.push_back(std::move(o));
  }
  if (ok > 0) {
    const double n = static_cast<double>(ok);
    report.mean_epe3d /= n;
    report.mean_acc3ds /= n;
    report.mean_acc3dr /= n;
    report.mean_outliers /= n;
    report.mean_mae /= n;
  }
  return report;
}

std::vector<PoseError> evaluate_ego(const TrainedModels& models, const Settings& settings,
                                    std::span<const std::uint64_t> seeds) {
  std::vector<PoseError> out;
  const auto& cfg = settings.pipeline;
  for (auto seed : seeds) {
    const SyntheticScene scene = generate_scene(seed, settings.scene);
    RigidTransform est;
    if (cfg.ego_method == flow::EgoMethod::kIcp) {
      est = icp(scene.x_t, scene.x_t1, cfg.ego_icp).transform;
    } else {
      const auto e_t = features::eigen_features(scene.x_t, cfg.ego.eigen_neighbors);
      const auto e_t1 = features::eigen_features(scene.x_t1, cfg.ego.eigen_neighbors);
      est = ego::estimate_ego(scene.x_t, scene.x_t1, e_t, e_t1, models.hop, cfg.ego).transform;
    }
    out.push_back(pose_error(est, scene.gt_ego));
  }
  return out;
}

double classifier_accuracy(const TrainedModels& models, const Settings& settings,
                           std::span<const std::uint64_t> seeds) {
  std::size_t correct = 0;
  std::size_t total = 0;
  for (auto seed : seeds) {
    const auto rows = classifier_rows(generate_scene(seed, settings.scene), settings);
    const auto pred = scene::predict_labels(models.gbt, rows.rows, settings.pipeline.scene.threshold);
    for (std::size_t i = 0; i < rows.labels.size(); ++i) correct += pred.moving[i] == rows.labels[i];
    total += rows.labels.size();
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace pointflow::harness
