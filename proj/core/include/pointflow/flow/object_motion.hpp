#pragma once

#include <vector>

#include "pointflow/core/rigid.hpp"
#include "pointflow/core/types.hpp"
#include "pointflow/features/hop_model.hpp"
#include "pointflow/objects/objects.hpp"

namespace pointflow::flow {

struct ObjectMotionConfig {
  std::size_t min_object_points = 10;
  double ratio_max = 0.9;
  bool ratio_test = true;       // false keeps every nearest match (ablation)
  double keep_fraction = 0.7;   // best share of survivors kept, by feature distance
  ConsensusConfig consensus;
};

struct ObjectMotion {
  std::int32_t id = 0;
  RigidTransform transform;      // in the X_{t+1} frame: X̃_t member -> X_{t+1}
  CorrespondenceSet inliers;     // indices into X̃_t and X_{t+1}
  double residual_rms = 0.0;
};

/// Rigid motion of one associated object from hop-feature correspondences.
/// Throws TooFewPoints when either side has fewer than min_object_points
/// members; NoCorrespondences / DegenerateCorrespondences propagate.
ObjectMotion estimate_object_motion(const objects::ObjectPair& pair, const features::HopModel& model,
                                    const PointCloud& x_t_warped, const PointCloud& x_t1,
                                    const ObjectMotionConfig& config = {});

/// dst - src for each pair. Diagnostic only.
std::vector<Point3> pointwise_flow_naive(const CorrespondenceSet& pairs, const PointCloud& x_t_warped,
                                         const PointCloud& x_t1);

}  // namespace pointflow::flow
