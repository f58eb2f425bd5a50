#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "pointflow/core/error.hpp"
#include "pointflow/egomotion/ego.hpp"
#include "pointflow/egomotion/matching.hpp"
#include "pointflow/harness/evaluation.hpp"
#include "pointflow/harness/synthetic.hpp"
#include "support.hpp"

using namespace pointflow;
using namespace pointflow::ego;
using namespace pointflow::testing;

namespace {

RowMatrix random_features(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d) {
  std::normal_distribution<double> g;
  RowMatrix f(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) f(i, j) = g(rng);
  return f;
}

// Straight double loop: nearest / second nearest, ratio test, greedy one-to-one.
CorrespondenceSet oracle_match(const RowMatrix& src, const RowMatrix& dst, std::size_t top_m, double ratio_max) {
  struct Cand {
    double d1;
    std::size_t s, d;
  };
  std::vector<Cand> cands;
  for (Eigen::Index i = 0; i < src.rows(); ++i) {
    double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
    std::size_t best = 0;
    for (Eigen::Index j = 0; j < dst.rows(); ++j) {
      const double d = (src.row(i) - dst.row(j)).norm();
      if (d < d1) {
        d2 = d1;
        d1 = d;
        best = static_cast<std::size_t>(j);
      } else if (d < d2) {
        d2 = d;
      }
    }
    const double ratio = d2 == 0.0 ? 1.0 : d1 / d2;
    if (ratio <= ratio_max) cands.push_back({d1, static_cast<std::size_t>(i), best});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.d1 < b.d1 || (a.d1 == b.d1 && a.s < b.s); });
  std::vector<bool> used(static_cast<std::size_t>(dst.rows()), false);
  CorrespondenceSet out;
  for (const auto& c : cands) {
    if (out.size() == top_m) break;
    if (used[c.d]) continue;
    used[c.d] = true;
    out.push_back({c.s, c.d, c.d1});
  }
  return out;
}

const features::HopModel& shared_model() {
  static const features::HopModel model = [] {
    features::HopModelConfig cfg;
    cfg.samples_per_cloud = 800;
    return features::hopmodel_fit(std::vector<PointCloud>{harness::generate_scene(201).x_t}, cfg);
  }();
  return model;
}

}  // namespace

TEST(Matching, AgreesWithBruteForceOracle) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const auto src = random_features(rng, 200, 6);
    const auto dst = random_features(rng, 200, 6);
    const auto got = match_features(src, dst, 64, 0.95);
    const auto want = oracle_match(src, dst, 64, 0.95);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].src, want[i].src);
      EXPECT_EQ(got[i].dst, want[i].dst);
      EXPECT_NEAR(got[i].feature_distance, want[i].feature_distance, 1e-12);
    }
  }
}

TEST(Matching, IdenticalSetsMatchThemselves) {
  std::mt19937_64 rng(32);
  const auto f = random_features(rng, 50, 4);
  const auto pairs = match_features(f, f, 50, 0.9);
  ASSERT_EQ(pairs.size(), 50u);
  for (const auto& p : pairs) {
    EXPECT_EQ(p.src, p.dst);
    EXPECT_EQ(p.feature_distance, 0.0);
  }
}

TEST(Matching, EquidistantPairRejectedAtRatioOne) {
  RowMatrix src(1, 1), dst(2, 1);
  src << 0.0;
  dst << -1.0, 1.0;
  try {
    match_features(src, dst, 10, 0.9);
    FAIL() << "ratio 1 survived";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoCorrespondences);
  }
  EXPECT_EQ(match_features(src, dst, 10, 1.0).size(), 1u);
}

TEST(Matching, RejectsBadArguments) {
  RowMatrix a(2, 3), b(2, 4), empty(0, 3);
  a.setZero();
  b.setZero();
  EXPECT_THROW(match_features(a, b, 5, 0.9), Error);
  EXPECT_THROW(match_features(a, empty, 5, 0.9), Error);
  EXPECT_THROW(match_features(a, a, 5, 0.0), Error);
  EXPECT_THROW(match_features(a, a, 5, 1.5), Error);
}

TEST(Views, BoundariesAreHalfOpen) {
  auto at = [](double degrees) { return view_of(Point3(std::cos(deg(degrees)), std::sin(deg(degrees)), 0.0)); };
  EXPECT_EQ(at(0), View::kFront);
  EXPECT_EQ(at(-45), View::kFront);
  EXPECT_EQ(at(45), View::kLeft);
  EXPECT_EQ(at(134.9), View::kLeft);
  EXPECT_EQ(at(135), View::kRear);
  EXPECT_EQ(view_of(Point3(-1, 0, 0)), View::kRear);
  EXPECT_EQ(view_of(Point3(-1, -0.0, 0)), View::kRear);
  EXPECT_EQ(at(-135), View::kRight);
  EXPECT_EQ(at(-45.1), View::kRight);
}

TEST(Views, PartitionIsTotalAndDisjoint) {
  std::mt19937_64 rng(33);
  const auto cloud = random_cloud(rng, 500);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < 500; i += 2) idx.push_back(i);
  const auto part = partition_views(cloud, idx);
  std::vector<int> seen(500, 0);
  std::size_t total = 0;
  for (int v = 0; v < 4; ++v)
    for (auto i : part.views[static_cast<std::size_t>(v)]) {
      ++seen[i];
      ++total;
      EXPECT_EQ(static_cast<int>(view_of(cloud[i])), v);
    }
  EXPECT_EQ(total, idx.size());
  for (auto i : idx) EXPECT_EQ(seen[i], 1);
}

TEST(Ego, StationaryPairGivesIdentity) {
  const auto cloud = harness::generate_scene(5).x_t;
  const auto est = estimate_ego(cloud, cloud, shared_model());
  EXPECT_LT(rotation_angle(est.transform.rotation), 1e-3);
  EXPECT_LT(est.transform.translation.norm(), 1e-3);
}

TEST(Ego, SelfWarpedPairRecoversTransform) {
  const auto cloud = harness::generate_scene(5).x_t;
  RigidTransform truth;
  truth.rotation = axis_angle(Point3(0, 0, 1), deg(2.0));
  truth.translation = Point3(1.0, 0.0, 0.0);
  const auto est = estimate_ego(cloud, apply_transform(cloud, truth), shared_model());
  EXPECT_LT((est.transform.translation - truth.translation).norm(), 1e-2);
  EXPECT_LT(rotation_angle(est.transform.rotation.transpose() * truth.rotation), 1e-3);
  EXPECT_GE(est.residual_rms, 0.0);

  // Equivariance: rotate both scans by Q, expect Q R Qᵀ.
  RigidTransform q;
  q.rotation = axis_angle(Point3(0.3, 0.5, 1.0).normalized(), 0.7);
  const auto rotated = estimate_ego(apply_transform(cloud, q), apply_transform(apply_transform(cloud, truth), q), shared_model());
  EXPECT_LT((rotated.transform.rotation - q.rotation * est.transform.rotation * q.rotation.transpose()).norm(), 1e-6);
}

TEST(Ego, SyntheticSceneWithMovingPoints) {
  for (std::uint64_t seed : {11u, 12u}) {
    const auto scene = harness::generate_scene(seed);
    ASSERT_LE(scene.moving_fraction(), 0.12);
    const auto est = estimate_ego(scene.x_t, scene.x_t1, shared_model());
    const auto err = harness::pose_error(est.transform, scene.gt_ego);
    EXPECT_LT(err.translation, 0.1) << "seed " << seed;
    EXPECT_LT(err.rotation_deg, 0.5) << "seed " << seed;
  }
}

TEST(Ego, CompensateKeepsOrder) {
  std::mt19937_64 rng(34);
  const auto cloud = random_cloud(rng, 30);
  EgoEstimate e;
  e.transform = random_transform(rng);
  const auto warped = compensate(cloud, e);
  for (std::size_t i = 0; i < cloud.size(); ++i) EXPECT_LT((warped[i] - e.transform.apply(cloud[i])).norm(), 1e-12);
}

TEST(Ego, TooFewPointsRejected) {
  std::mt19937_64 rng(35);
  const auto small = random_cloud(rng, 100);
  try {
    estimate_ego(small, small, shared_model());
    FAIL() << "accepted 100 points with sample_size 1024";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientSamples);
  }
}
