#include "pointflow/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Geometry>

#include "pointflow/core/error.hpp"

namespace pointflow::harness {

MetricsReport compute_metrics(std::span<const Point3> estimated, std::span<const Point3> ground_truth) {
  if (estimated.size() != ground_truth.size()) {
    throw Error(ErrorCode::kLengthMismatch, "estimated flow has " + std::to_string(estimated.size()) +
                                                " vectors, ground truth has " + std::to_string(ground_truth.size()));
  }
  MetricsReport r;
  r.n_evaluated = estimated.size();
  if (estimated.empty()) return r;

  double epe_sum = 0.0;
  double angle_sum = 0.0;
  std::size_t strict = 0;
  std::size_t relaxed = 0;
  std::size_t outliers = 0;
  std::size_t angled = 0;
  for (std::size_t i = 0; i < estimated.size(); ++i) {
    const Point3& e = estimated[i];
    const Point3& g = ground_truth[i];
    const double epe = (e - g).norm();
    const double gn = g.norm();
    const double rel = epe / std::max(gn, kMetricEpsilon);
    epe_sum += epe;
    if (epe < 0.05 || rel < 0.05) ++strict;
    if (epe < 0.1 || rel < 0.1) ++relaxed;
    if (epe > 0.3 || rel > 0.1) ++outliers;
    const double en = e.norm();
    if (gn < kMetricEpsilon || en < kMetricEpsilon) {
      ++r.mae_excluded;
      continue;
    }
    // atan2 of |cross| and dot stays accurate near 0 and pi, unlike acos.
    angle_sum += std::atan2(e.cross(g).norm(), e.dot(g));
    ++angled;
  }
  const auto n = static_cast<double>(estimated.size());
  r.epe3d = epe_sum / n;
  r.acc3ds = static_cast<double>(strict) / n;
  r.acc3dr = static_cast<double>(relaxed) / n;
  r.outlier_frac = static_cast<double>(outliers) / n;
  r.mae = angled > 0 ? angle_sum / static_cast<double>(angled) : 0.0;
  return r;
}

MetricsReport compute_metrics(const flow::FlowField& estimated, const SyntheticScene& scene) {
  return compute_metrics(estimated.vectors, scene.gt_flow);
}

}  // namespace pointflow::harness
