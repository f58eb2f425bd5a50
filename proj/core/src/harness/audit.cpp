#include "pointflow/harness/audit.hpp"

#include <cmath>

namespace pointflow::harness {

std::size_t inferred_tree_params(std::size_t depth) {
  const std::size_t leaves = std::size_t{1} << depth;
  return 2 * (leaves - 1) + leaves;
}

namespace {

// Arithmetic of one feature extraction pass, per point. Neighbor search is
// left out (it is comparisons, reported in its own term).
double feature_flops_per_point(const features::HopModel& hop, std::size_t eigen_neighbors) {
  const auto& c = hop.config;
  const double a = static_cast<double>(c.attribute_width());
  const double d1 = 8.0 * a;
  auto eigen_pass = [](double k) {
    // mean (3k adds), centered outer products (3k subs + 6 MACs), 3x3 symmetric
    // eigen solve (~150), the scalar shape features (~30)
    return 3.0 * k + k * (3.0 + 12.0) + 150.0 + 30.0;
  };
  double flops = eigen_pass(static_cast<double>(eigen_neighbors));
  if (c.attributes == features::DescriptorAttributes::kRelativeAndShape) {
    flops += eigen_pass(static_cast<double>(c.shape_neighbors));
  }
  const double k1 = static_cast<double>(c.hop1_neighbors);
  // offsets (3 subs), octant sign tests (3), attribute sums, then 8A divisions
  flops += k1 * (3.0 + 3.0 + a) + d1;
  // hop-1 projection: AC channels subtract the mean and take a dot product
  const double ac1 = static_cast<double>(hop.hop1.num_kernels() > 0 ? hop.hop1.num_kernels() - 1 : 0);
  flops += ac1 * (d1 + 2.0 * d1) + 2.0 * d1;
  const double k2 = static_cast<double>(c.hop2_neighbors);
  for (const auto& bank : hop.hop2) {
    const double d2 = static_cast<double>(bank.input_dim());
    const double ac2 = static_cast<double>(bank.num_kernels() > 0 ? bank.num_kernels() - 1 : 0);
    flops += k2 * 4.0 + d2;  // offsets' octant tests + sums, then means
    flops += ac2 * 3.0 * d2 + 2.0 * d2;
  }
  return flops;
}

double matching_flops(double src, double dst, double width) {
  // squared distance per pair (sub + MAC), sqrt of the two best, ratio compare
  return src * dst * (3.0 * width + 2.0) + src * 3.0;
}

double procrustes_flops(double pairs) {
  // means, centered cross-covariance MACs, one 3x3 SVD (~500), R and t
  return pairs * (6.0 + 6.0 + 18.0) + 500.0 + 60.0;
}

}  // namespace

AuditReport audit_model(const features::HopModel& hop, const scene::GbtModel& gbt, const AuditConfig& config) {
  AuditReport r;
  r.hop1_weights = hop.hop1_weight_count();
  r.hop2_weights = hop.hop2_weight_count();
  r.kernel_weights = r.hop1_weights + r.hop2_weights;
  r.trees = gbt.trees.size();
  for (const auto& t : gbt.trees) {
    r.tree_thresholds += t.split_count();
    r.tree_leaves += t.leaf_count();
  }
  r.tree_params = r.tree_thresholds + r.tree_leaves;
  r.tree_params_inferred = r.trees * inferred_tree_params(gbt.max_depth);
  r.total_params = r.kernel_weights + r.tree_params;
  r.total_params_inferred = r.kernel_weights + r.tree_params_inferred;
  r.parameter_convention =
      "kernel weights = sum over Saab banks of kernels x input dim (DC kernel included); "
      "tree_params counts one threshold per realized split and one value per leaf; "
      "tree_params_inferred counts every tree as full at the configured depth with thresholds, "
      "leaves and feature ids (22 per depth-3 tree). The inferred convention reproduces the "
      "published total but is not stated by the source; treat it as convention-dependent.";
  r.flop_convention =
      "multiply-add = 2 FLOPs; add, subtract, multiply, divide, compare, sqrt = 1 FLOP each. "
      "Counted: descriptor builds, Saab projections, feature matching, Procrustes SVDs, ICP "
      "iterations, classifier and clustering arithmetic. Neighbor search is reported as its own "
      "term (distance evaluations of a balanced kd-tree, k log2 n candidates per query). "
      "Total divided by points per scan.";

  const auto& p = config.pipeline;
  const double n = static_cast<double>(config.points);
  const double log_n = std::log2(std::max(n, 2.0));
  const double width = static_cast<double>(hop.feature_width());
  const double per_point_features = feature_flops_per_point(hop, p.ego.eigen_neighbors);
  const double moving = std::round(n * config.moving_fraction);
  const double objects = static_cast<double>(std::max<std::size_t>(config.objects, 1));
  auto add = [&](std::string name, double flops) { r.flop_terms.push_back({std::move(name), flops}); };

  add("features (both scans)", 2.0 * n * per_point_features);
  const double m = static_cast<double>(p.ego.sample_size);
  add("ego matching (4 views)", 4.0 * matching_flops(m / 4.0, m / 4.0, width));
  add("ego procrustes", procrustes_flops(static_cast<double>(p.ego.top_matches)) + n * 18.0);
  // voxel keys, nearest-centroid distance, five scene features, boosted trees
  const double trees = static_cast<double>(gbt.trees.size());
  add("scene classification (both scans)",
      2.0 * n * (6.0 + 9.0 + 10.0 + trees * (static_cast<double>(gbt.max_depth) + 1.0) + 20.0));
  // region queries on the moving points, plus the refinement radius test
  add("clustering and refinement", 2.0 * moving * 20.0 * 9.0 + n * 9.0);
  add("object features (both scans)", 2.0 * moving * per_point_features);
  const double per_object = moving / objects;
  add("object matching", objects * matching_flops(per_object, per_object, width));
  add("object procrustes", objects * procrustes_flops(std::ceil(0.7 * per_object)));
  add("flow initialization", n * (18.0 * 2.0 + 3.0));
  // per ICP iteration: transform, residual, cross-covariance, one 3x3 SVD per region
  const double regions = std::max(1.0, n / static_cast<double>(p.refine.min_region_points * 5));
  add("region icp", static_cast<double>(config.region_icp_iterations) * (n * (18.0 + 9.0 + 30.0) + regions * 560.0));
  double search = 0.0;
  {
    const auto& c = hop.config;
    const double queries_k = static_cast<double>(p.ego.eigen_neighbors + std::max(c.hop1_neighbors, c.hop2_neighbors) +
                                                 (c.attributes == features::DescriptorAttributes::kRelativeAndShape
                                                      ? c.shape_neighbors
                                                      : 0));
    search = 9.0 * log_n * (2.0 * n + 2.0 * moving) * queries_k;
  }
  add("neighbor search (not in total)", search);

  for (const auto& t : r.flop_terms) {
    if (t.name.find("not in total") == std::string::npos) r.flops_total += t.flops;
  }
  r.flop_points = config.points;
  r.flops_per_point = r.flops_total / n;
  return r;
}

}  // namespace pointflow::harness
