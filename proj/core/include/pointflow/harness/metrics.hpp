#pragma once

#include <cstddef>
#include <span>

#include "pointflow/core/types.hpp"
#include "pointflow/flow/flow_field.hpp"
#include "pointflow/harness/synthetic.hpp"

namespace pointflow::harness {

inline constexpr double kMetricEpsilon = 1e-6;

struct MetricsReport {
  double epe3d = 0.0;         // meters
  double acc3ds = 0.0;
  double acc3dr = 0.0;
  double outlier_frac = 0.0;
  double mae = 0.0;           // radians
  std::size_t n_evaluated = 0;
  std::size_t mae_excluded = 0;  // pairs with a near-zero vector, left out of MAE
};

/// Per point: epe = |est - gt|, rel = epe / max(|gt|, eps).
///   Acc3DS: epe < 0.05 or rel < 0.05
///   Acc3DR: epe < 0.1 or rel < 0.1
///   Outliers: epe > 0.3 or rel > 0.1
/// MAE averages the angle between est and gt over pairs where both norms are
/// at least eps. Throws LengthMismatch.
MetricsReport compute_metrics(std::span<const Point3> estimated, std::span<const Point3> ground_truth);
MetricsReport compute_metrics(const flow::FlowField& estimated, const SyntheticScene& scene);

}  // namespace pointflow::harness
