#include "pointflow/egomotion/ego.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pointflow/core/error.hpp"
#include "pointflow/core/rigid.hpp"
#include "pointflow/egomotion/matching.hpp"

namespace pointflow::ego {

View view_of(const Point3& p) {
  const double deg = std::atan2(p.y(), p.x()) * 180.0 / std::numbers::pi;  // (-180, 180]
  if (deg >= -45.0 && deg < 45.0) return View::kFront;
  if (deg >= 45.0 && deg < 135.0) return View::kLeft;
  if (deg >= -135.0 && deg < -45.0) return View::kRight;
  return View::kRear;
}

ViewPartition partition_views(const PointCloud& cloud, std::span<const std::size_t> indices) {
  ViewPartition out;
  for (std::size_t i : indices) out.views[static_cast<int>(view_of(cloud[i]))].push_back(i);
  return out;
}

namespace {

std::size_t usable_points(const std::vector<features::EigenFeatures>& eigen) {
  return static_cast<std::size_t>(
      std::count_if(eigen.begin(), eigen.end(), [](const auto& e) { return !e.degenerate; }));
}

RowMatrix gather_rows(const RowMatrix& all, const std::vector<std::size_t>& rows) {
  RowMatrix out(static_cast<Eigen::Index>(rows.size()), all.cols());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    out.row(static_cast<Eigen::Index>(j)) = all.row(static_cast<Eigen::Index>(rows[j]));
  }
  return out;
}

}  // namespace

EgoEstimate estimate_ego(const PointCloud& x_t, const PointCloud& x_t1,
                         const features::HopModel& model, const EgoConfig& config) {
  const std::size_t k = config.eigen_neighbors;
  if (x_t.size() < k || x_t1.size() < k) {
    throw Error(ErrorCode::kInsufficientSamples, "clouds smaller than the eigen neighborhood");
  }
  return estimate_ego(x_t, x_t1, features::eigen_features(x_t, k), features::eigen_features(x_t1, k),
                      model, config);
}

EgoEstimate estimate_ego(const PointCloud& x_t, const PointCloud& x_t1,
                         const std::vector<features::EigenFeatures>& eigen_t,
                         const std::vector<features::EigenFeatures>& eigen_t1,
                         const features::HopModel& model, const EgoConfig& config) {
  if (usable_points(eigen_t) < config.sample_size || usable_points(eigen_t1) < config.sample_size) {
    throw Error(ErrorCode::kInsufficientSamples,
                "ego-motion needs " + std::to_string(config.sample_size) + " usable points per cloud");
  }
  const auto sample_t = features::geometry_aware_sample(x_t, config.sample_size, eigen_t, config.sampling);
  const auto sample_t1 =
      features::geometry_aware_sample(x_t1, config.sample_size, eigen_t1, config.sampling);
  const ViewPartition views_t = partition_views(x_t, sample_t);
  const ViewPartition views_t1 = partition_views(x_t1, sample_t1);

  const RowMatrix feats_t = features::extract_features(model, x_t);
  const RowMatrix feats_t1 = features::extract_features(model, x_t1);

  const std::size_t per_view = std::max<std::size_t>(1, config.top_matches / 4);
  EgoEstimate est;
  for (int v = 0; v < 4; ++v) {
    const auto& src_idx = views_t.views[v];
    const auto& dst_idx = views_t1.views[v];
    if (src_idx.empty() || dst_idx.empty()) continue;
    CorrespondenceSet pairs;
    try {
      pairs = match_features(gather_rows(feats_t, src_idx), gather_rows(feats_t1, dst_idx), per_view,
                             config.ratio_max);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoCorrespondences) throw;
      continue;
    }
    for (auto c : pairs) {
      c.src = src_idx[c.src];
      c.dst = dst_idx[c.dst];
      est.inliers.push_back(c);
    }
  }
  if (est.inliers.empty()) {
    throw Error(ErrorCode::kNoCorrespondences, "no view produced a feature match");
  }

  if (est.inliers.size() < 3) {
    throw Error(ErrorCode::kDegenerateCorrespondences,
                "rigid_align needs at least 3 pairs, got " + std::to_string(est.inliers.size()));
  }
  auto fit = consensus_align(x_t, x_t1, est.inliers, config.consensus);
  est.transform = fit.transform;
  est.inliers = std::move(fit.inliers);
  if (config.trimmed_second_pass && est.inliers.size() > 3) {
    std::vector<std::pair<double, std::size_t>> residuals;
    for (std::size_t i = 0; i < est.inliers.size(); ++i) {
      const auto& c = est.inliers[i];
      residuals.emplace_back((est.transform.apply(x_t[c.src]) - x_t1[c.dst]).squaredNorm(), i);
    }
    std::sort(residuals.begin(), residuals.end());
    const auto keep = std::max<std::size_t>(
        3, static_cast<std::size_t>(std::ceil((1.0 - config.trim_fraction) * residuals.size())));
    CorrespondenceSet kept;
    for (std::size_t i = 0; i < keep && i < residuals.size(); ++i) {
      kept.push_back(est.inliers[residuals[i].second]);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.src < b.src; });
    est.inliers = std::move(kept);
    est.transform = rigid_align(x_t, x_t1, est.inliers);
  }
  est.residual_rms = pair_residual_rms(x_t, x_t1, est.inliers, est.transform);
  return est;
}

PointCloud compensate(const PointCloud& x_t, const EgoEstimate& ego) {
  return apply_transform(x_t, ego.transform);
}

}  // namespace pointflow::ego
