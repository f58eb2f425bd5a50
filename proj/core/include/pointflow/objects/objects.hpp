#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pointflow/core/types.hpp"
#include "pointflow/sceneclass/scene_classifier.hpp"

namespace pointflow::objects {

inline constexpr std::int32_t kOutlier = -1;

struct Clustering {
  std::vector<std::int32_t> labels;  // cluster id per point or kOutlier
  std::vector<Point3> centroids;     // mean of the members of each cluster
  double eps = 0.0;
  std::size_t min_pts = 0;

  std::size_t cluster_count() const { return centroids.size(); }
  std::vector<std::size_t> members(std::int32_t cluster) const;
};

/// Classic DBSCAN. A point is core when at least min_pts points (itself
/// included) lie within eps. Clusters are seeded from unvisited core points
/// in ascending index order and expanded breadth-first; a border point joins
/// the first cluster that reaches it. Throws InvalidArgument unless eps > 0 and
/// min_pts >= 1.
Clustering dbscan(const PointCloud& points, double eps, std::size_t min_pts);

/// Runs DBSCAN on the moving points of `cloud` and reports the result in the
/// index space of the whole cloud; static points are kOutlier.
Clustering cluster_moving(const PointCloud& cloud, const scene::SceneLabeling& labels, double eps,
                          std::size_t min_pts);

struct ObjectPair {
  std::int32_t id = 0;           // src cluster id
  std::int32_t dst_cluster = 0;
  std::vector<std::size_t> src_members;  // indices into X̃_t
  std::vector<std::size_t> dst_members;  // indices into X_{t+1}
  Point3 src_centroid = Point3::Zero();
  Point3 dst_centroid = Point3::Zero();
  double centroid_distance = 0.0;
};

struct Association {
  std::vector<ObjectPair> pairs;
  std::vector<std::int32_t> dropped;  // src clusters beyond the gate
};

/// Each src cluster takes its nearest dst centroid (ties to lower id); pairs
/// farther apart than max_distance are dropped. Many-to-one is allowed.
Association associate(const Clustering& src, const Clustering& dst, double max_distance = 5.0);

/// Every static point within r of a point that is moving in `labels` becomes
/// moving. With `iterate` the sweep repeats until no label changes.
scene::SceneLabeling refine_objects(const scene::SceneLabeling& labels, const PointCloud& cloud,
                                    double radius, bool iterate = false);

/// Moving points that DBSCAN marked as outliers become static.
scene::SceneLabeling outliers_to_static(const Clustering& clustering, const scene::SceneLabeling& labels);

/// Assigns points that are moving in `labels` but unclustered to the cluster of
/// their nearest clustered point when it lies within eps. Runs in rounds, so a
/// chain of recovered points can grow a cluster; whatever is still unassigned
/// is set static. Centroids are recomputed. Returns (clustering, labels).
std::pair<Clustering, scene::SceneLabeling> absorb_refined(const PointCloud& cloud,
                                                           const Clustering& clustering,
                                                           const scene::SceneLabeling& labels);

}  // namespace pointflow::objects
