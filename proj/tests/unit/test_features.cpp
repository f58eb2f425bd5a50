#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "pointflow/core/error.hpp"
#include "pointflow/features/eigen_features.hpp"
#include "pointflow/features/hop_model.hpp"
#include "pointflow/features/octant.hpp"
#include "pointflow/features/saab.hpp"
#include "pointflow/features/sampling.hpp"
#include "pointflow/harness/synthetic.hpp"
#include "support.hpp"

using namespace pointflow;
using namespace pointflow::features;
using namespace pointflow::testing;

TEST(EigenFeatures, MatchCovarianceOracle) {
  std::mt19937_64 rng(21);
  auto pts = random_points(rng, 300, 4.0);
  for (auto& p : pts) p.z() *= 0.1;  // flattened, so planarity is exercised
  const PointCloud cloud(pts);
  const std::size_t k = 12;
  const auto ef = eigen_features(cloud, k);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto nn = brute_knn(pts, pts[i], k);
    Point3 mean = Point3::Zero();
    for (auto j : nn) mean += pts[j];
    mean /= static_cast<double>(k);
    Matrix3 cov = Matrix3::Zero();
    for (auto j : nn) cov += (pts[j] - mean) * (pts[j] - mean).transpose();
    cov /= static_cast<double>(k);
    Eigen::SelfAdjointEigenSolver<Matrix3> solver(cov);
    const double l1 = solver.eigenvalues()[2], l2 = solver.eigenvalues()[1], l3 = std::max(0.0, solver.eigenvalues()[0]);
    const double sum = l1 + l2 + l3;
    double entropy = 0.0;
    for (double l : {l1, l2, l3})
      if (l > 0) entropy -= l / sum * std::log(l / sum);
    EXPECT_NEAR(ef[i].linearity, (l1 - l2) / l1, 1e-9);
    EXPECT_NEAR(ef[i].planarity, (l2 - l3) / l1, 1e-9);
    EXPECT_NEAR(ef[i].eigen_sum, sum, 1e-9);
    EXPECT_NEAR(ef[i].eigen_entropy, entropy, 1e-9);
  }
}

TEST(EigenFeatures, RigidMotionInvariant) {
  std::mt19937_64 rng(22);
  const auto cloud = random_cloud(rng, 200, 3.0);
  const auto a = eigen_features(cloud, 10);
  const auto b = eigen_features(apply_transform(cloud, random_transform(rng)), 10);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i].linearity, b[i].linearity, 1e-8);
    EXPECT_NEAR(a[i].planarity, b[i].planarity, 1e-8);
    EXPECT_NEAR(a[i].eigen_sum, b[i].eigen_sum, 1e-8);
    EXPECT_NEAR(a[i].eigen_entropy, b[i].eigen_entropy, 1e-8);
  }
}

TEST(EigenFeatures, DegenerateAndBadK) {
  const PointCloud same(std::vector<Point3>(5, Point3(1, 2, 3)));
  const auto ef = eigen_features(same, 3);
  EXPECT_TRUE(ef[0].degenerate);
  EXPECT_EQ(ef[0].linearity, 0.0);
  EXPECT_THROW(eigen_features(same, 2), Error);
  EXPECT_THROW(eigen_features(same, 6), Error);
  const auto line = eigen_features_from_values(Point3(1, 0, 0));
  EXPECT_DOUBLE_EQ(line.linearity, 1.0);
  EXPECT_DOUBLE_EQ(line.eigen_entropy, 0.0);
}

TEST(Sampling, TakesTopSalientPointsRoundRobin) {
  const auto scene = harness::generate_scene(3);
  const auto ef = eigen_features(scene.x_t, 16);
  const SamplingConfig cfg;
  const std::size_t m = 1024;
  const auto picked = geometry_aware_sample(scene.x_t, m, ef, cfg);
  ASSERT_EQ(picked.size(), m);
  EXPECT_TRUE(std::is_sorted(picked.begin(), picked.end()));
  EXPECT_EQ(std::adjacent_find(picked.begin(), picked.end()), picked.end());
  EXPECT_EQ(picked, geometry_aware_sample(scene.x_t, m, ef, cfg));

  double max_range = 0.0;
  for (const auto& p : scene.x_t) max_range = std::max(max_range, std::hypot(p.x(), p.y()));
  std::map<std::size_t, std::vector<std::size_t>> bins, chosen;
  for (std::size_t i = 0; i < scene.x_t.size(); ++i)
    if (!ef[i].degenerate) bins[sampling_bin(scene.x_t[i], cfg, max_range)].push_back(i);
  for (auto i : picked) {
    ASSERT_FALSE(ef[i].degenerate);
    chosen[sampling_bin(scene.x_t[i], cfg, max_range)].push_back(i);
  }
  // Round-robin: a bin is either exhausted or within one of the fullest bin.
  std::size_t most = 0;
  for (auto& [b, v] : chosen) most = std::max(most, v.size());
  for (auto& [b, members] : bins) {
    const std::size_t got = chosen[b].size();
    EXPECT_TRUE(got == members.size() || got + 1 >= most) << "bin " << b;
    // Within a bin, nothing unpicked is more salient than something picked.
    double weakest = 1e9;
    for (auto i : chosen[b]) weakest = std::min(weakest, ef[i].saliency());
    for (auto i : members)
      if (!std::binary_search(picked.begin(), picked.end(), i)) {
        EXPECT_LE(ef[i].saliency(), weakest);
      }
  }
}

TEST(Octant, SignConvention) {
  EXPECT_EQ(octant_of(Point3(0, 0, 0)), 7);
  EXPECT_EQ(octant_of(Point3(-1, -1, -1)), 0);
  EXPECT_EQ(octant_of(Point3(1, -1, -1)), 1);
  EXPECT_EQ(octant_of(Point3(-1, 2, -1)), 2);
  EXPECT_EQ(octant_of(Point3(-1, -1, 3)), 4);
}

TEST(Octant, PoolAveragesPerOctant) {
  const std::vector<Point3> offsets{Point3(1, 1, 1), Point3(2, 2, 2), Point3(-1, -1, -1)};
  RowMatrix attrs(3, 2);
  attrs << 1, 10, 3, 30, 5, 50;
  const auto pooled = octant_pool(offsets, attrs);
  ASSERT_EQ(pooled.size(), 16);
  EXPECT_DOUBLE_EQ(pooled[14], 2.0);  // octant 7, mean of 1 and 3
  EXPECT_DOUBLE_EQ(pooled[15], 20.0);
  EXPECT_DOUBLE_EQ(pooled[0], 5.0);   // octant 0
  EXPECT_DOUBLE_EQ(pooled[1], 50.0);
  EXPECT_DOUBLE_EQ(pooled.segment(2, 12).cwiseAbs().sum(), 0.0);
}

TEST(Octant, DescriptorExcludesCenterAndUsesRelativeCoordinates) {
  std::mt19937_64 rng(23);
  const auto pts = random_points(rng, 50, 2.0);
  const PointCloud cloud(pts);
  const KdIndex index(cloud);
  const RowMatrix none(50, 0);
  const std::size_t center = 7, k = 10;
  const auto d = octant_descriptor(cloud, none, index, center, k);
  auto nn = brute_knn(pts, pts[center], k + 1);
  nn.erase(std::find(nn.begin(), nn.end(), center));
  Eigen::VectorXd expect = Eigen::VectorXd::Zero(24);
  std::array<int, 8> count{};
  for (auto j : nn) {
    const Point3 off = pts[j] - pts[center];
    const int o = (off.x() >= 0) | ((off.y() >= 0) << 1) | ((off.z() >= 0) << 2);
    expect.segment<3>(3 * o) += off;
    ++count[o];
  }
  for (int o = 0; o < 8; ++o)
    if (count[o]) expect.segment<3>(3 * o) /= count[o];
  EXPECT_LT((d - expect).norm(), 1e-12);
}

namespace {

RowMatrix random_samples(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d) {
  std::normal_distribution<double> g;
  RowMatrix mix(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) mix(i, j) = g(rng);
  RowMatrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = g(rng) + 3.0;
  return x * mix;
}

}  // namespace

TEST(Saab, KernelsOrthonormalWithConstantDc) {
  std::mt19937_64 rng(24);
  const auto x = random_samples(rng, 400, 12);
  const auto bank = saab_fit(x, 12);
  const Eigen::MatrixXd gram = bank.kernels * bank.kernels.transpose();
  EXPECT_LE((gram - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff(), 1e-8);
  const double c = 1.0 / std::sqrt(12.0);
  EXPECT_LE((bank.kernels.row(0).array() - c).abs().maxCoeff(), 1e-12);
  for (Eigen::Index i = 2; i < bank.energies.size(); ++i) EXPECT_LE(bank.energies[i], bank.energies[i - 1] + 1e-12);
}

TEST(Saab, EnergyMatchesCovarianceTrace) {
  std::mt19937_64 rng(25);
  const Eigen::Index d = 9;
  const auto x = random_samples(rng, 500, d);
  const auto bank = saab_fit(x, 4);
  // Oracle: remove each sample's DC component, then take the covariance trace.
  const Eigen::VectorXd mean = x.colwise().mean().transpose();
  double full_trace = 0.0, ac_trace = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::VectorXd c = x.row(i).transpose() - mean;
    full_trace += c.squaredNorm();
    const Eigen::VectorXd ac = c - Eigen::VectorXd::Constant(d, c.mean());
    ac_trace += ac.squaredNorm();
  }
  full_trace /= static_cast<double>(x.rows());
  ac_trace /= static_cast<double>(x.rows());
  EXPECT_NEAR(bank.ac_energies.sum(), ac_trace, 1e-6);
  EXPECT_NEAR(bank.energies[0] + bank.ac_energies.sum(), full_trace, 1e-6);
  EXPECT_EQ(bank.num_kernels(), 4);
  EXPECT_EQ(bank.ac_energies.size(), d - 1);
}

TEST(Saab, ResponsesMatchDefinitionAndRowForm) {
  std::mt19937_64 rng(26);
  const auto x = random_samples(rng, 100, 6);
  const auto bank = saab_fit(x, 6);
  const auto rows = bank.transform_rows(x);
  for (Eigen::Index i = 0; i < 5; ++i) {
    const Eigen::VectorXd xi = x.row(i).transpose();
    const auto r = bank.transform(xi);
    EXPECT_NEAR(r[0], bank.kernels.row(0).dot(xi), 1e-12);
    for (Eigen::Index k = 1; k < 6; ++k) EXPECT_NEAR(r[k], bank.kernels.row(k).dot(xi - bank.mean), 1e-12);
    EXPECT_LT((rows.row(i).transpose() - r).norm(), 1e-10);
  }
  EXPECT_THROW(saab_fit(x.topRows(1), 3), Error);
}

namespace {

HopModelConfig small_config() {
  HopModelConfig c;
  c.samples_per_cloud = 600;
  return c;
}

std::vector<PointCloud> training_clouds() {
  harness::SceneConfig sc;
  return {harness::generate_scene(101, sc).x_t, harness::generate_scene(102, sc).x_t};
}

}  // namespace

TEST(HopModel, TranslationInvariantAndPermutationEquivariant) {
  const auto model = hopmodel_fit(training_clouds(), small_config());
  std::mt19937_64 rng(27);
  const auto cloud = random_cloud(rng, 400, 6.0);
  const auto f = extract_features(model, cloud);
  EXPECT_EQ(static_cast<std::size_t>(f.cols()), model.feature_width());

  std::vector<Point3> shifted;
  for (const auto& p : cloud) shifted.push_back(p + Point3(13.0, -7.0, 2.5));
  const auto g = extract_features(model, PointCloud(shifted));
  EXPECT_LE((f - g).cwiseAbs().maxCoeff(), 1e-8);

  std::vector<std::size_t> perm(cloud.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto h = extract_features(model, cloud.select(perm));
  for (std::size_t i = 0; i < perm.size(); ++i)
    EXPECT_LE((h.row(static_cast<Eigen::Index>(i)) - f.row(static_cast<Eigen::Index>(perm[i]))).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(HopModel, WideDescriptorKernelAudit) {
  auto cfg = small_config();
  cfg.attributes = DescriptorAttributes::kRelativeAndShape;
  const auto model = hopmodel_fit(training_clouds(), cfg);
  EXPECT_EQ(model.hop1.input_dim(), 88);
  EXPECT_EQ(model.hop1_weight_count(), 1144u);  // 13 x 88
  EXPECT_EQ(model.hop2_weight_count(), 832u);   // 13 channels x 8 kernels x 8 octants
  EXPECT_EQ(model.kernel_weight_count(), 1976u);
  EXPECT_EQ(model.feature_width(), 13u + 13u * 8u);
}

TEST(HopModel, EnergyThresholdDropsWeakChannels) {
  auto cfg = small_config();
  cfg.energy_threshold = 0.05;
  const auto model = hopmodel_fit(training_clouds(), cfg);
  const double total = model.hop1.energies.sum();
  for (std::size_t c : model.retained_channels) EXPECT_GE(model.hop1.energies[static_cast<Eigen::Index>(c)], 0.05 * total);
  EXPECT_LT(model.retained_channels.size(), 13u);
}

TEST(HopModel, SerializationRoundTripIsBitExact) {
  const auto model = hopmodel_fit(training_clouds(), small_config());
  io::ByteWriter w;
  write_hop_model(w, model);
  io::ByteReader r(w.bytes());
  const auto back = read_hop_model(r);
  io::ByteWriter w2;
  write_hop_model(w2, back);
  EXPECT_EQ(w.bytes(), w2.bytes());
  EXPECT_EQ(back.hop1.kernels, model.hop1.kernels);

  auto truncated = w.bytes();
  truncated.resize(truncated.size() / 2);
  io::ByteReader short_reader(truncated);
  EXPECT_THROW(read_hop_model(short_reader), Error);
}

TEST(HopModel, FitIsDeterministic) {
  const auto a = hopmodel_fit(training_clouds(), small_config());
  const auto b = hopmodel_fit(training_clouds(), small_config());
  EXPECT_EQ(a.hop1.kernels, b.hop1.kernels);
  EXPECT_THROW(hopmodel_fit(std::vector<PointCloud>{PointCloud({Point3::Zero()})}, small_config()), Error);
}
