#include "pointflow/flow/pipeline.hpp"

#include <chrono>
#include <utility>

#include "pointflow/core/error.hpp"

namespace pointflow::flow {

namespace {

class StageClock {
 public:
  StageClock(std::vector<StageTiming>& sink, std::string stage)
      : sink_(sink), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
  ~StageClock() {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
    sink_.push_back({stage_, elapsed.count()});
  }
  StageClock(const StageClock&) = delete;
  StageClock& operator=(const StageClock&) = delete;

 private:
  std::vector<StageTiming>& sink_;
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

template <typename Fn>
auto stage(std::vector<StageTiming>& timings, const std::string& name, Fn&& fn) {
  StageClock clock(timings, name);
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

void refresh_members(objects::Association& assoc, const objects::Clustering& src,
                     const objects::Clustering& dst) {
  for (auto& pair : assoc.pairs) {
    pair.src_members = src.members(pair.id);
    pair.dst_members = dst.members(pair.dst_cluster);
  }
}

}  // namespace

PipelineResult run_pipeline(const PointCloud& x_t, const PointCloud& x_t1,
                            const features::HopModel& hop_model, const scene::GbtModel& classifier,
                            const PipelineConfig& config) {
  PipelineResult r;
  const std::size_t k = config.ego.eigen_neighbors;

  auto [eigen_t, eigen_t1] = stage(r.timings, "eigen", [&] {
    return std::make_pair(features::eigen_features(x_t, k), features::eigen_features(x_t1, k));
  });

  r.ego = stage(r.timings, "ego", [&] {
    if (config.ego_method == EgoMethod::kIcp) {
      const IcpResult icp_result = icp(x_t, x_t1, config.ego_icp);
      ego::EgoEstimate est;
      est.transform = icp_result.transform;
      est.residual_rms = icp_result.residuals.empty() ? 0.0 : icp_result.residuals.back();
      return est;
    }
    return ego::estimate_ego(x_t, x_t1, eigen_t, eigen_t1, hop_model, config.ego);
  });
  r.x_t_warped = ego::compensate(x_t, r.ego);

  stage(r.timings, "classify", [&] {
    std::tie(r.classified_t, r.classified_t1) =
        scene::classify_scene(r.x_t_warped, x_t1, eigen_t, eigen_t1, classifier, config.scene);
    return 0;
  });

  stage(r.timings, "associate", [&] {
    r.clusters_t = objects::cluster_moving(r.x_t_warped, r.classified_t, config.dbscan_eps, config.dbscan_min_pts);
    r.clusters_t1 = objects::cluster_moving(x_t1, r.classified_t1, config.dbscan_eps, config.dbscan_min_pts);
    r.labels_t = objects::outliers_to_static(r.clusters_t, r.classified_t);
    r.labels_t1 = objects::outliers_to_static(r.clusters_t1, r.classified_t1);
    r.association = objects::associate(r.clusters_t, r.clusters_t1, config.association_max_distance);
    return 0;
  });

  if (config.object_refinement) {
    stage(r.timings, "object_refine", [&] {
      const auto grown_t = objects::refine_objects(r.labels_t, r.x_t_warped, config.refinement_radius,
                                                   config.refinement_iterate);
      const auto grown_t1 =
          objects::refine_objects(r.labels_t1, x_t1, config.refinement_radius, config.refinement_iterate);
      std::tie(r.clusters_t, r.labels_t) = objects::absorb_refined(r.x_t_warped, r.clusters_t, grown_t);
      std::tie(r.clusters_t1, r.labels_t1) = objects::absorb_refined(x_t1, r.clusters_t1, grown_t1);
      if (config.reassociate) {
        r.association = objects::associate(r.clusters_t, r.clusters_t1, config.association_max_distance);
      } else {
        refresh_members(r.association, r.clusters_t, r.clusters_t1);
      }
      return 0;
    });
  }

  stage(r.timings, "object_motion", [&] {
    for (const auto& pair : r.association.pairs) {
      try {
        r.motions.push_back(
            estimate_object_motion(pair, hop_model, r.x_t_warped, x_t1, config.object_motion));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kTooFewPoints && e.code() != ErrorCode::kNoCorrespondences &&
            e.code() != ErrorCode::kDegenerateCorrespondences) {
          throw;
        }
        r.demoted.push_back(pair.id);
        r.events.push_back("object " + std::to_string(pair.id) + " demoted to static: " + e.what());
      }
    }
    return 0;
  });

  stage(r.timings, "flow", [&] {
    r.membership.assign(x_t.size(), kStatic);
    for (const auto& m : r.motions) {
      for (std::size_t i : r.clusters_t.members(m.id)) r.membership[i] = m.id;
    }
    r.draft = initialize_flow(x_t, r.ego.transform, r.motions, r.membership);
    r.flow = config.flow_refinement ? refine_flow(x_t, r.draft, x_t1, config.refine) : r.draft.flow;
    if (config.convention == FlowConvention::kEgoCompensated) {
      for (std::size_t i = 0; i < x_t.size(); ++i) r.flow.vectors[i] -= r.x_t_warped[i] - x_t[i];
    }
    return 0;
  });
  return r;
}

}  // namespace pointflow::flow
