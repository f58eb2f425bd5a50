#include <benchmark/benchmark.h>

#include <random>

#include "pointflow/core/kd_index.hpp"
#include "pointflow/core/rigid.hpp"
#include "pointflow/features/hop_model.hpp"
#include "pointflow/flow/pipeline.hpp"
#include "pointflow/harness/evaluation.hpp"
#include "pointflow/harness/training.hpp"
#include "pointflow/objects/objects.hpp"

using namespace pointflow;

namespace {

PointCloud uniform_cloud(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  std::vector<Point3> pts(n);
  for (auto& p : pts) p = Point3(u(rng), u(rng), 0.1 * u(rng));
  return PointCloud(std::move(pts));
}

const harness::TrainedModels& models() {
  static const auto m = harness::train_synthetic(harness::training_seeds(2), harness::Settings{});
  return m;
}

}  // namespace

static void BM_KdBuild(benchmark::State& state) {
  const auto cloud = uniform_cloud(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(KdIndex(cloud));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KdBuild)->Arg(1 << 12)->Arg(1 << 14);

static void BM_KdKnn16(benchmark::State& state) {
  const auto cloud = uniform_cloud(static_cast<std::size_t>(state.range(0)), 2);
  const KdIndex index(cloud);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.knn(cloud[i], 16));
    i = (i + 1) % cloud.size();
  }
}
BENCHMARK(BM_KdKnn16)->Arg(1 << 12)->Arg(1 << 14);

static void BM_RigidAlign(benchmark::State& state) {
  const auto src = uniform_cloud(static_cast<std::size_t>(state.range(0)), 3);
  RigidTransform t;
  t.rotation = axis_angle(Point3(0, 0, 1), 0.05);
  t.translation = Point3(1.0, 0.2, 0.0);
  const auto dst = apply_transform(src, t);
  for (auto _ : state) benchmark::DoNotOptimize(rigid_align(src.points(), dst.points()));
}
BENCHMARK(BM_RigidAlign)->Arg(50)->Arg(256)->Arg(4096);

static void BM_Icp(benchmark::State& state) {
  const auto scene = harness::generate_scene(5);
  for (auto _ : state) benchmark::DoNotOptimize(icp(scene.x_t, scene.x_t1));
  state.SetLabel(std::to_string(scene.x_t.size()) + " points");
}
BENCHMARK(BM_Icp)->Unit(benchmark::kMillisecond);

static void BM_Dbscan(benchmark::State& state) {
  const auto cloud = uniform_cloud(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(objects::dbscan(cloud, 0.75, 10));
}
BENCHMARK(BM_Dbscan)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

static void BM_HopFeatures(benchmark::State& state) {
  const auto cloud = harness::generate_scene(6).x_t;
  for (auto _ : state) benchmark::DoNotOptimize(features::extract_features(models().hop, cloud));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cloud.size()));
}
BENCHMARK(BM_HopFeatures)->Unit(benchmark::kMillisecond);

static void BM_Pipeline(benchmark::State& state) {
  const auto scene = harness::generate_scene(7);
  for (auto _ : state)
    benchmark::DoNotOptimize(flow::run_pipeline(scene.x_t, scene.x_t1, models().hop, models().gbt));
  state.SetLabel(std::to_string(scene.x_t.size()) + " points");
}
BENCHMARK(BM_Pipeline)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
