#include <gtest/gtest.h>

#include <map>
#include <random>

#include "pointflow/core/error.hpp"
#include "pointflow/flow/object_motion.hpp"
#include "pointflow/harness/evaluation.hpp"
#include "pointflow/harness/synthetic.hpp"
#include "pointflow/objects/objects.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace pointflow;
using namespace pointflow::objects;
using namespace pointflow::testing;

namespace {

Clustering clustering_from_centroids(const std::vector<Point3>& c) {
  Clustering out;
  out.centroids = c;
  return out;
}

scene::SceneLabeling labeling(std::vector<std::uint8_t> moving) {
  scene::SceneLabeling l;
  l.probability.assign(moving.size(), 0.5);
  l.moving = std::move(moving);
  return l;
}

}  // namespace

TEST(Dbscan, MatchesBruteForceReference) {
  std::mt19937_64 rng(51);
  std::uniform_int_distribution<std::size_t> count(20, 500);
  std::uniform_real_distribution<double> eps(0.3, 1.5);
  std::uniform_int_distribution<std::size_t> minpts(1, 8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pts = random_cloud(rng, count(rng), 6.0);
    const double e = eps(rng);
    const std::size_t m = minpts(rng);
    const auto got = dbscan(pts, e, m);
    const auto want = reference_dbscan(pts, e, m);
    ASSERT_TRUE(same_partition(got.labels, want)) << "trial " << trial;
    for (std::int32_t c = 0; c < static_cast<std::int32_t>(got.cluster_count()); ++c) {
      Point3 mean = Point3::Zero();
      const auto mem = got.members(c);
      for (auto i : mem) mean += pts[i];
      EXPECT_LT((mean / static_cast<double>(mem.size()) - got.centroids[static_cast<std::size_t>(c)]).norm(), 1e-12);
    }
  }
}

TEST(Dbscan, TrivialCases) {
  std::mt19937_64 rng(52);
  std::normal_distribution<double> g(0.0, 0.2);
  std::vector<Point3> blobs;
  for (int b = 0; b < 2; ++b)
    for (int i = 0; i < 20; ++i) blobs.push_back(Point3(10.0 * b + g(rng), g(rng), g(rng)));
  const auto c = dbscan(PointCloud(blobs), 1.0, 4);
  EXPECT_EQ(c.cluster_count(), 2u);
  for (auto l : c.labels) EXPECT_NE(l, kOutlier);

  const PointCloud sparse({Point3(0, 0, 0), Point3(5, 0, 0), Point3(0, 5, 0)});
  for (auto l : dbscan(sparse, 1.0, 4).labels) EXPECT_EQ(l, kOutlier);
  EXPECT_THROW(dbscan(sparse, 0.0, 4), Error);
  EXPECT_THROW(dbscan(sparse, 1.0, 0), Error);
}

TEST(Associate, TrivialAndBruteForce) {
  const auto same = clustering_from_centroids({Point3(0, 0, 0), Point3(10, 0, 0), Point3(0, 10, 0)});
  const auto self = associate(same, same);
  ASSERT_EQ(self.pairs.size(), 3u);
  for (const auto& p : self.pairs) {
    EXPECT_EQ(p.id, p.dst_cluster);
    EXPECT_EQ(p.centroid_distance, 0.0);
  }

  const auto one = associate(clustering_from_centroids({Point3::Zero()}),
                             clustering_from_centroids({Point3(5, 0, 0), Point3(0, 1, 0)}));
  ASSERT_EQ(one.pairs.size(), 1u);
  EXPECT_EQ(one.pairs[0].dst_cluster, 1);

  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 50; ++trial) {
    const auto src = clustering_from_centroids(random_points(rng, 8, 20.0));
    const auto dst = clustering_from_centroids(random_points(rng, 6, 20.0));
    const auto got = associate(src, dst, 5.0);
    std::size_t k = 0;
    for (std::size_t i = 0; i < src.centroids.size(); ++i) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < dst.centroids.size(); ++j)
        if ((src.centroids[i] - dst.centroids[j]).norm() < (src.centroids[i] - dst.centroids[best]).norm()) best = j;
      const double d = (src.centroids[i] - dst.centroids[best]).norm();
      if (d > 5.0) {
        EXPECT_NE(std::find(got.dropped.begin(), got.dropped.end(), static_cast<std::int32_t>(i)), got.dropped.end());
        continue;
      }
      ASSERT_LT(k, got.pairs.size());
      EXPECT_EQ(got.pairs[k].id, static_cast<std::int32_t>(i));
      EXPECT_EQ(got.pairs[k].dst_cluster, static_cast<std::int32_t>(best));
      EXPECT_NEAR(got.pairs[k].centroid_distance, d, 1e-12);
      ++k;
    }
    EXPECT_EQ(k, got.pairs.size());
  }
}

TEST(RefineObjects, ThresholdEdge) {
  const double r = 0.5, e = 1e-6;
  const PointCloud near({Point3::Zero(), Point3(r - e, 0, 0)});
  const PointCloud far({Point3::Zero(), Point3(r + e, 0, 0)});
  EXPECT_EQ(refine_objects(labeling({1, 0}), near, r).moving[1], 1);
  EXPECT_EQ(refine_objects(labeling({1, 0}), far, r).moving[1], 0);
  EXPECT_EQ(refine_objects(labeling({0, 0}), near, r).moving, (std::vector<std::uint8_t>{0, 0}));
}

TEST(RefineObjects, SinglePassVersusClosure) {
  // chain 0 - 1 - 2 with spacing 0.4 and r = 0.5
  const PointCloud chain({Point3(0, 0, 0), Point3(0.4, 0, 0), Point3(0.8, 0, 0)});
  EXPECT_EQ(refine_objects(labeling({1, 0, 0}), chain, 0.5, false).moving, (std::vector<std::uint8_t>{1, 1, 0}));
  EXPECT_EQ(refine_objects(labeling({1, 0, 0}), chain, 0.5, true).moving, (std::vector<std::uint8_t>{1, 1, 1}));
}

TEST(RefineObjects, RecoversMislabeledObjectPoints) {
  const auto scene = harness::generate_scene(54);
  std::mt19937_64 rng(54);
  std::bernoulli_distribution drop(0.05);
  auto labels = scene.gt_labels_t;
  std::size_t objects = 0;
  for (auto& l : labels)
    if (l) {
      ++objects;
      if (drop(rng)) l = 0;
    }
  ASSERT_GT(objects, 100u);
  const auto refined = refine_objects(labeling(labels), scene.x_t, 0.5);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += scene.gt_labels_t[i] && refined.moving[i];
  EXPECT_GE(static_cast<double>(hit) / objects, 0.99);
}

TEST(OutliersToStatic, PerPointRule) {
  Clustering c;
  c.labels = {kOutlier, 0, kOutlier, 1, 0};
  const auto got = outliers_to_static(c, labeling({1, 1, 0, 1, 0}));
  EXPECT_EQ(got.moving, (std::vector<std::uint8_t>{0, 1, 0, 1, 0}));

  c.labels.assign(5, kOutlier);
  EXPECT_EQ(outliers_to_static(c, labeling({1, 1, 1, 1, 1})).moving, std::vector<std::uint8_t>(5, 0));
  c.labels = {0, 0, 0, 0, 0};
  EXPECT_EQ(outliers_to_static(c, labeling({1, 0, 1, 0, 1})).moving, (std::vector<std::uint8_t>{1, 0, 1, 0, 1}));
}

TEST(AbsorbRefined, ChainsGrowClustersAndStraysTurnStatic) {
  std::vector<Point3> pts;
  for (int i = 0; i < 12; ++i) pts.push_back(Point3(0.1 * (i % 4), 0.1 * (i / 4), 0));  // dense core
  pts.push_back(Point3(0.9, 0.0, 0.0));  // 12: within eps of the core edge
  pts.push_back(Point3(1.5, 0.0, 0.0));  // 13: only reachable through 12
  pts.push_back(Point3(9.0, 9.0, 0.0));  // 14: stray
  pts.push_back(Point3(1.2, 0.0, 0.0));  // 15: static, stays static
  const PointCloud cloud(pts);
  const auto clustering = dbscan(PointCloud({pts.begin(), pts.begin() + 12}), 0.75, 4);
  Clustering full;
  full.labels.assign(cloud.size(), kOutlier);
  for (std::size_t i = 0; i < 12; ++i) full.labels[i] = clustering.labels[i];
  full.centroids = clustering.centroids;
  full.eps = 0.75;
  full.min_pts = 4;

  std::vector<std::uint8_t> moving(cloud.size(), 1);
  moving[15] = 0;
  const auto [c, l] = absorb_refined(cloud, full, labeling(moving));
  EXPECT_EQ(c.labels[12], 0);
  EXPECT_EQ(c.labels[13], 0);
  EXPECT_EQ(c.labels[14], kOutlier);
  EXPECT_EQ(c.labels[15], kOutlier);
  EXPECT_EQ(l.moving[14], 0);
  EXPECT_EQ(l.moving[15], 0);
  Point3 mean = Point3::Zero();
  for (std::size_t i = 0; i < 14; ++i) mean += cloud[i];
  EXPECT_LT((c.centroids[0] - mean / 14.0).norm(), 1e-12);
}

namespace {

const features::HopModel& object_model() {
  static const features::HopModel model = [] {
    features::HopModelConfig cfg;
    cfg.samples_per_cloud = 800;
    return features::hopmodel_fit(std::vector<PointCloud>{harness::generate_scene(202).x_t}, cfg);
  }();
  return model;
}

// Points of the largest generated object, as its own cloud.
PointCloud object_points(std::uint64_t seed) {
  const auto scene = harness::generate_scene(seed);
  std::map<std::int32_t, std::vector<std::size_t>> by;
  for (std::size_t i = 0; i < scene.x_t.size(); ++i)
    if (scene.gt_object_t[i] >= 0) by[scene.gt_object_t[i]].push_back(i);
  std::vector<std::size_t> best;
  for (auto& [id, idx] : by)
    if (idx.size() > best.size()) best = idx;
  return scene.x_t.select(best);
}

ObjectPair whole_pair(std::size_t n_src, std::size_t n_dst) {
  ObjectPair p;
  for (std::size_t i = 0; i < n_src; ++i) p.src_members.push_back(i);
  for (std::size_t i = 0; i < n_dst; ++i) p.dst_members.push_back(i);
  return p;
}

}  // namespace

TEST(ObjectMotion, ZeroMotionIsIdentity) {
  const auto obj = object_points(55);
  ASSERT_GT(obj.size(), 100u);
  const auto m = flow::estimate_object_motion(whole_pair(obj.size(), obj.size()), object_model(), obj, obj);
  EXPECT_LT(rotation_angle(m.transform.rotation), 1e-9);
  EXPECT_LT(m.transform.translation.norm(), 1e-9);
}

TEST(ObjectMotion, SelfWarpedObjectRecovered) {
  const auto obj = object_points(55);
  RigidTransform truth;
  truth.rotation = axis_angle(Point3(0, 0, 1), deg(3.0));
  truth.translation = Point3(1.8, -0.4, 0.0);
  const auto m =
      flow::estimate_object_motion(whole_pair(obj.size(), obj.size()), object_model(), obj, apply_transform(obj, truth));
  EXPECT_LT((m.transform.translation - truth.translation).norm(), 1e-6);
  EXPECT_LT(rotation_angle(m.transform.rotation.transpose() * truth.rotation), 1e-6);
  for (const auto& c : m.inliers) EXPECT_EQ(c.src, c.dst);
}

TEST(ObjectMotion, TooFewPoints) {
  const auto obj = object_points(55);
  try {
    flow::estimate_object_motion(whole_pair(5, obj.size()), object_model(), obj, obj);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewPoints);
  }
}

TEST(ObjectMotion, NaiveFlowIsDstMinusSrc) {
  std::mt19937_64 rng(56);
  const auto a = random_cloud(rng, 10);
  const Point3 t(0.3, -1.0, 2.0);
  CorrespondenceSet pairs;
  for (std::size_t i = 0; i < 10; ++i) pairs.push_back({i, i, 0.0});
  for (const auto& f : flow::pointwise_flow_naive(pairs, a, a)) EXPECT_EQ(f.norm(), 0.0);
  RigidTransform shift;
  shift.translation = t;
  for (const auto& f : flow::pointwise_flow_naive(pairs, a, apply_transform(a, shift))) EXPECT_LT((f - t).norm(), 1e-12);
}
