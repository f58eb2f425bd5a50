#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pointflow/core/kd_index.hpp"
#include "pointflow/core/types.hpp"

namespace pointflow {

/// Least-squares rigid transform mapping src[i] onto dst[i] (Kabsch / orthogonal
/// Procrustes). Cross-covariance K = Σ (s - s̄)(d - d̄)ᵀ = U S Vᵀ, R = V Uᵀ,
/// t = d̄ - R s̄. When det(V Uᵀ) < 0 the column of V belonging to the smallest
/// singular value is negated so R is always a proper rotation.
///
/// Throws DegenerateCorrespondences for fewer than 3 pairs or rank(K) < 2.
RigidTransform rigid_align(std::span<const Point3> src, std::span<const Point3> dst);

RigidTransform rigid_align(const PointCloud& src, const PointCloud& dst,
                           const CorrespondenceSet& pairs);

/// Root mean squared |T src_i - dst_i| over the pairs.
double pair_residual_rms(const PointCloud& src, const PointCloud& dst,
                         const CorrespondenceSet& pairs, const RigidTransform& transform);

/// Sample-consensus wrapper around rigid_align for correspondence sets with a
/// large share of wrong pairs. Seeded, so results are reproducible.
struct ConsensusConfig {
  bool enabled = true;              // false: plain rigid_align on every pair
  /// Random 3-pair hypotheses. Sampling stops early once `confidence` of
  /// having drawn an all-agreeing triple is reached for the best agreeing share.
  std::size_t iterations = 50000;
  double confidence = 0.9999;
  double inlier_distance = 0.25;    // meters, |T src - dst| for a pair to agree
  std::size_t refinements = 3;      // refit on the agreeing pairs, recollect, repeat
  std::uint64_t seed = 17;
};

struct ConsensusResult {
  RigidTransform transform;
  CorrespondenceSet inliers;  // agreeing pairs, in input order
};

/// Best 3-pair hypothesis by agreeing-pair count (first found wins ties), then
/// least-squares refits on its agreeing set. Falls back to all pairs when no
/// hypothesis gathers 3 agreeing pairs. Throws DegenerateCorrespondences for
/// fewer than 3 pairs.
ConsensusResult consensus_align(const PointCloud& src, const PointCloud& dst,
                                const CorrespondenceSet& pairs, const ConsensusConfig& config = {});

struct IcpConfig {
  int max_iterations = 30;
  double tolerance = 1e-4;          // meters, on the residual improvement
  double max_pair_distance = 1.0;   // nearest neighbors farther than this are ignored
};

struct IcpResult {
  RigidTransform transform;
  /// Residual at each pairing step: sqrt(mean_i min(d_i², gate²)) over all source
  /// points, where d_i is the nearest-neighbor distance. Non-increasing.
  std::vector<double> residuals;
  int iterations = 0;
  bool converged = false;
};

/// Point-to-point ICP of src onto dst, starting from `initial`.
///
/// Stops when the residual improves by less than the tolerance, when
/// max_iterations alignments have run, or when no pair passes the distance gate.
IcpResult icp(const PointCloud& src, const PointCloud& dst, const IcpConfig& config = {},
              const RigidTransform& initial = RigidTransform::identity());

/// Same, reusing a prebuilt index over dst.
IcpResult icp(const PointCloud& src, const KdIndex& dst_index, const IcpConfig& config = {},
              const RigidTransform& initial = RigidTransform::identity());

}  // namespace pointflow
