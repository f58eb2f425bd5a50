#pragma once

#include <string>
#include <vector>

#include "pointflow/core/rigid.hpp"
#include "pointflow/egomotion/ego.hpp"
#include "pointflow/features/hop_model.hpp"
#include "pointflow/flow/flow_field.hpp"
#include "pointflow/flow/object_motion.hpp"
#include "pointflow/objects/objects.hpp"
#include "pointflow/sceneclass/gbt.hpp"
#include "pointflow/sceneclass/scene_classifier.hpp"

namespace pointflow::flow {

enum class EgoMethod { kFeatureMatching, kIcp };

/// kEgo: static points carry the ego-induced displacement (flow toward the
/// X_{t+1} frame). kEgoCompensated: the ego displacement is subtracted, so
/// static points get zero flow.
enum class FlowConvention { kEgo, kEgoCompensated };

struct PipelineConfig {
  EgoMethod ego_method = EgoMethod::kFeatureMatching;
  ego::EgoConfig ego;
  IcpConfig ego_icp{30, 1e-4, 1.0};
  scene::SceneClassConfig scene;
  double dbscan_eps = 0.75;
  std::size_t dbscan_min_pts = 10;
  double association_max_distance = 5.0;
  bool object_refinement = true;
  double refinement_radius = 0.5;
  bool refinement_iterate = true;
  // Re-run centroid association on the refined clusters. Pre-refinement
  // fragments cover only the vacated / entered part of a car and their
  // centroids can be further apart than the gate.
  bool reassociate = true;
  ObjectMotionConfig object_motion;
  bool flow_refinement = true;
  RefineConfig refine;
  FlowConvention convention = FlowConvention::kEgo;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

/// Every intermediate artifact of one run, for inspection and ablation.
struct PipelineResult {
  FlowField flow;
  DraftFlow draft;
  ego::EgoEstimate ego;
  PointCloud x_t_warped;
  scene::SceneLabeling classified_t;   // raw classifier output
  scene::SceneLabeling classified_t1;
  scene::SceneLabeling labels_t;       // after outlier demotion and refinement
  scene::SceneLabeling labels_t1;
  objects::Clustering clusters_t;
  objects::Clustering clusters_t1;
  objects::Association association;
  std::vector<ObjectMotion> motions;
  std::vector<std::int32_t> demoted;   // object ids that fell back to ego-only flow
  std::vector<std::int32_t> membership;  // object id per X_t point or kStatic
  std::vector<StageTiming> timings;
  std::vector<std::string> events;
};

/// Runs the six stages in order: ego-motion, scene classification, object
/// clustering and association, object refinement, object motion, flow
/// initialization and refinement. Errors surface as StageError tagged with the
/// failing stage; an ego-motion failure aborts the run.
PipelineResult run_pipeline(const PointCloud& x_t, const PointCloud& x_t1,
                            const features::HopModel& hop_model, const scene::GbtModel& classifier,
                            const PipelineConfig& config = {});

}  // namespace pointflow::flow
