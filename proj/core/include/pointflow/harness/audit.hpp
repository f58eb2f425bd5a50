#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pointflow/features/hop_model.hpp"
#include "pointflow/flow/pipeline.hpp"
#include "pointflow/sceneclass/gbt.hpp"

namespace pointflow::harness {

/// Workload assumed by the analytic FLOP count.
struct AuditConfig {
  std::size_t points = 8192;        // per scan
  double moving_fraction = 0.1;
  std::size_t objects = 4;
  double points_per_voxel = 8.0;    // occupancy of the classifier grid
  std::size_t region_icp_iterations = 10;
  flow::PipelineConfig pipeline;
};

struct FlopTerm {
  std::string name;
  double flops = 0.0;
};

struct AuditReport {
  std::size_t hop1_weights = 0;
  std::size_t hop2_weights = 0;
  std::size_t kernel_weights = 0;
  std::size_t trees = 0;
  std::size_t tree_thresholds = 0;     // realized splits
  std::size_t tree_leaves = 0;
  /// Learnable values actually stored: one threshold per split, one value per leaf.
  std::size_t tree_params = 0;
  /// Full trees of the configured depth, counting thresholds, leaves and
  /// feature ids (22 per depth-3 tree). Inferred, not stated by the source.
  std::size_t tree_params_inferred = 0;
  std::size_t total_params = 0;
  std::size_t total_params_inferred = 0;

  std::size_t flop_points = 0;
  std::vector<FlopTerm> flop_terms;
  double flops_total = 0.0;
  double flops_per_point = 0.0;

  std::string parameter_convention;
  std::string flop_convention;
};

AuditReport audit_model(const features::HopModel& hop, const scene::GbtModel& gbt, const AuditConfig& config = {});

/// Per-tree parameter count under the inferred convention for a full tree of
/// the given depth: (2^d - 1) thresholds + 2^d leaves + (2^d - 1) feature ids.
std::size_t inferred_tree_params(std::size_t depth);

}  // namespace pointflow::harness
