#include "pointflow/flow/object_motion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pointflow/core/error.hpp"
#include "pointflow/core/rigid.hpp"
#include "pointflow/egomotion/matching.hpp"

namespace pointflow::flow {

ObjectMotion estimate_object_motion(const objects::ObjectPair& pair, const features::HopModel& model,
                                    const PointCloud& x_t_warped, const PointCloud& x_t1,
                                    const ObjectMotionConfig& config) {
  const std::size_t need = std::max<std::size_t>(config.min_object_points, 3);
  if (pair.src_members.size() < need || pair.dst_members.size() < need) {
    throw Error(ErrorCode::kTooFewPoints,
                "object " + std::to_string(pair.id) + " has " + std::to_string(pair.src_members.size()) +
                    "/" + std::to_string(pair.dst_members.size()) + " points");
  }
  const PointCloud src = x_t_warped.select(pair.src_members);
  const PointCloud dst = x_t1.select(pair.dst_members);
  const auto src_feats = features::extract_features(model, src);
  const auto dst_feats = features::extract_features(model, dst);

  const double ratio = config.ratio_test ? config.ratio_max : 1.0;
  CorrespondenceSet matches =
      ego::match_features(src_feats, dst_feats, std::numeric_limits<std::size_t>::max(), ratio);
  const auto keep = std::max<std::size_t>(
      3, static_cast<std::size_t>(std::ceil(config.keep_fraction * static_cast<double>(matches.size()))));
  if (matches.size() > keep) matches.resize(keep);  // already ascending by feature distance

  ObjectMotion motion;
  motion.id = pair.id;
  for (auto c : matches) {
    c.src = pair.src_members[c.src];
    c.dst = pair.dst_members[c.dst];
    motion.inliers.push_back(c);
  }
  auto fit = consensus_align(x_t_warped, x_t1, motion.inliers, config.consensus);
  motion.transform = fit.transform;
  motion.inliers = std::move(fit.inliers);
  motion.residual_rms = pair_residual_rms(x_t_warped, x_t1, motion.inliers, motion.transform);
  return motion;
}

std::vector<Point3> pointwise_flow_naive(const CorrespondenceSet& pairs, const PointCloud& x_t_warped,
                                         const PointCloud& x_t1) {
  std::vector<Point3> out;
  out.reserve(pairs.size());
  for (const auto& c : pairs) out.push_back(x_t1[c.dst] - x_t_warped[c.src]);
  return out;
}

}  // namespace pointflow::flow
