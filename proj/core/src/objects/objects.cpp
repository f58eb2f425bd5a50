#include "pointflow/objects/objects.hpp"

#include <algorithm>
#include <deque>

#include "pointflow/core/error.hpp"
#include "pointflow/core/kd_index.hpp"

namespace pointflow::objects {

namespace {

constexpr std::int32_t kUnvisited = -2;

void compute_centroids(const PointCloud& cloud, Clustering& c) {
  std::int32_t max_id = -1;
  for (auto l : c.labels) max_id = std::max(max_id, l);
  std::vector<Point3> sums(static_cast<std::size_t>(max_id + 1), Point3::Zero());
  std::vector<std::size_t> counts(sums.size(), 0);
  for (std::size_t i = 0; i < c.labels.size(); ++i) {
    if (c.labels[i] < 0) continue;
    sums[c.labels[i]] += cloud[i];
    ++counts[c.labels[i]];
  }
  c.centroids.resize(sums.size());
  for (std::size_t k = 0; k < sums.size(); ++k) {
    c.centroids[k] = counts[k] > 0 ? Point3(sums[k] / static_cast<double>(counts[k])) : Point3::Zero();
  }
}

}  // namespace

std::vector<std::size_t> Clustering::members(std::int32_t cluster) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == cluster) out.push_back(i);
  }
  return out;
}

Clustering dbscan(const PointCloud& points, double eps, std::size_t min_pts) {
  if (!(eps > 0.0) || min_pts < 1) {
    throw Error(ErrorCode::kInvalidArgument, "dbscan needs eps > 0 and min_pts >= 1");
  }
  Clustering out;
  out.eps = eps;
  out.min_pts = min_pts;
  out.labels.assign(points.size(), kUnvisited);
  if (points.empty()) return out;

  const KdIndex index(points);
  std::int32_t next_id = 0;
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (out.labels[i] != kUnvisited) continue;
    const auto seeds = index.radius_search(points[i], eps);
    if (seeds.size() < min_pts) {
      out.labels[i] = kOutlier;
      continue;
    }
    const std::int32_t id = next_id++;
    out.labels[i] = id;
    queue.assign(seeds.begin(), seeds.end());
    while (!queue.empty()) {
      const std::size_t q = queue.front();
      queue.pop_front();
      if (out.labels[q] == kOutlier) out.labels[q] = id;  // border point
      if (out.labels[q] != kUnvisited) continue;
      out.labels[q] = id;
      const auto nb = index.radius_search(points[q], eps);
      if (nb.size() >= min_pts) {
        for (std::size_t r : nb) {
          if (out.labels[r] == kUnvisited || out.labels[r] == kOutlier) queue.push_back(r);
        }
      }
    }
  }
  compute_centroids(points, out);
  return out;
}

Clustering cluster_moving(const PointCloud& cloud, const scene::SceneLabeling& labels, double eps,
                          std::size_t min_pts) {
  if (labels.size() != cloud.size()) throw Error(ErrorCode::kLengthMismatch, "labels do not match cloud");
  std::vector<std::size_t> moving;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (labels.moving[i]) moving.push_back(i);
  }
  const Clustering sub = dbscan(cloud.select(moving), eps, min_pts);
  Clustering out;
  out.eps = eps;
  out.min_pts = min_pts;
  out.labels.assign(cloud.size(), kOutlier);
  for (std::size_t j = 0; j < moving.size(); ++j) out.labels[moving[j]] = sub.labels[j];
  out.centroids = sub.centroids;
  return out;
}

Association associate(const Clustering& src, const Clustering& dst, double max_distance) {
  Association out;
  if (dst.cluster_count() == 0) {
    for (std::size_t k = 0; k < src.cluster_count(); ++k) out.dropped.push_back(static_cast<std::int32_t>(k));
    return out;
  }
  for (std::size_t k = 0; k < src.cluster_count(); ++k) {
    std::size_t best = 0;
    double best_d2 = (src.centroids[k] - dst.centroids[0]).squaredNorm();
    for (std::size_t j = 1; j < dst.cluster_count(); ++j) {
      const double d2 = (src.centroids[k] - dst.centroids[j]).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = j;
      }
    }
    const double d = std::sqrt(best_d2);
    if (d > max_distance) {
      out.dropped.push_back(static_cast<std::int32_t>(k));
      continue;
    }
    ObjectPair pair;
    pair.id = static_cast<std::int32_t>(k);
    pair.dst_cluster = static_cast<std::int32_t>(best);
    pair.src_members = src.members(pair.id);
    pair.dst_members = dst.members(pair.dst_cluster);
    pair.src_centroid = src.centroids[k];
    pair.dst_centroid = dst.centroids[best];
    pair.centroid_distance = d;
    out.pairs.push_back(std::move(pair));
  }
  return out;
}

scene::SceneLabeling refine_objects(const scene::SceneLabeling& labels, const PointCloud& cloud,
                                    double radius, bool iterate) {
  if (!(radius > 0.0)) throw Error(ErrorCode::kInvalidArgument, "refinement radius must be > 0");
  if (labels.size() != cloud.size()) throw Error(ErrorCode::kLengthMismatch, "labels do not match cloud");
  scene::SceneLabeling out = labels;
  const KdIndex index(cloud);
  std::vector<std::size_t> sweep;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (labels.moving[i]) sweep.push_back(i);
  }
  while (!sweep.empty()) {
    std::vector<std::size_t> flipped;
    for (std::size_t i : sweep) {
      for (std::size_t j : index.radius_search(cloud[i], radius)) {
        if (!out.moving[j]) {
          out.moving[j] = 1;
          flipped.push_back(j);
        }
      }
    }
    if (!iterate) break;
    std::sort(flipped.begin(), flipped.end());
    sweep = std::move(flipped);
  }
  return out;
}

scene::SceneLabeling outliers_to_static(const Clustering& clustering, const scene::SceneLabeling& labels) {
  if (labels.size() != clustering.labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, "labels do not match clustering");
  }
  scene::SceneLabeling out = labels;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (clustering.labels[i] == kOutlier) out.moving[i] = 0;
  }
  return out;
}

std::pair<Clustering, scene::SceneLabeling> absorb_refined(const PointCloud& cloud,
                                                           const Clustering& clustering,
                                                           const scene::SceneLabeling& labels) {
  Clustering c = clustering;
  scene::SceneLabeling l = labels;
  const double eps2 = clustering.eps * clustering.eps;
  // Rounds of nearest-anchor assignment. Refinement radii below eps settle in
  // one round; iterated refinement grows chains that need several.
  while (true) {
    std::vector<std::size_t> clustered;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (c.labels[i] >= 0) clustered.push_back(i);
    }
    if (clustered.empty()) break;
    const PointCloud anchors = cloud.select(clustered);
    const KdIndex index(anchors);
    std::vector<std::pair<std::size_t, std::int32_t>> joined;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (!l.moving[i] || c.labels[i] >= 0) continue;
      const Neighbor nn = *index.nearest(cloud[i]);
      if (nn.squared_distance <= eps2) joined.emplace_back(i, c.labels[clustered[nn.index]]);
    }
    if (joined.empty()) break;
    for (const auto& [i, id] : joined) c.labels[i] = id;
  }
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (c.labels[i] < 0) l.moving[i] = 0;
  }
  compute_centroids(cloud, c);
  return {c, l};
}

}  // namespace pointflow::objects
