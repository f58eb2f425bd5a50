#include "pointflow/core/rigid.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "pointflow/core/error.hpp"

namespace pointflow {

RigidTransform rigid_align(std::span<const Point3> src, std::span<const Point3> dst) {
  if (src.size() != dst.size()) {
    throw Error(ErrorCode::kLengthMismatch, "rigid_align needs equally sized point lists");
  }
  const std::size_t n = src.size();
  if (n < 3) {
    throw Error(ErrorCode::kDegenerateCorrespondences,
                "rigid_align needs at least 3 pairs, got " + std::to_string(n));
  }

  Point3 src_mean = Point3::Zero();
  Point3 dst_mean = Point3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    src_mean += src[i];
    dst_mean += dst[i];
  }
  src_mean /= static_cast<double>(n);
  dst_mean /= static_cast<double>(n);

  Matrix3 cov = Matrix3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    cov += (src[i] - src_mean) * (dst[i] - dst_mean).transpose();
  }

  Eigen::JacobiSVD<Matrix3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Point3 sv = svd.singularValues();  // descending
  if (!(sv[0] > 0.0) || sv[1] <= 1e-12 * sv[0]) {
    throw Error(ErrorCode::kDegenerateCorrespondences,
                "cross-covariance has rank < 2 (collinear or coincident pairs)");
  }

  Matrix3 v = svd.matrixV();
  const Matrix3& u = svd.matrixU();
  if ((v * u.transpose()).determinant() < 0.0) v.col(2) = -v.col(2);

  RigidTransform out;
  out.rotation = v * u.transpose();
  out.translation = dst_mean - out.rotation * src_mean;
  return out;
}

RigidTransform rigid_align(const PointCloud& src, const PointCloud& dst,
                           const CorrespondenceSet& pairs) {
  std::vector<Point3> a;
  std::vector<Point3> b;
  a.reserve(pairs.size());
  b.reserve(pairs.size());
  for (const auto& c : pairs) {
    a.push_back(src[c.src]);
    b.push_back(dst[c.dst]);
  }
  return rigid_align(a, b);
}

double pair_residual_rms(const PointCloud& src, const PointCloud& dst,
                         const CorrespondenceSet& pairs, const RigidTransform& transform) {
  if (pairs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& c : pairs) sum += (transform.apply(src[c.src]) - dst[c.dst]).squaredNorm();
  return std::sqrt(sum / static_cast<double>(pairs.size()));
}

namespace {

CorrespondenceSet agreeing(const PointCloud& src, const PointCloud& dst, const CorrespondenceSet& pairs,
                           const RigidTransform& t, double limit_sq) {
  CorrespondenceSet out;
  for (const auto& c : pairs) {
    if ((t.apply(src[c.src]) - dst[c.dst]).squaredNorm() < limit_sq) out.push_back(c);
  }
  return out;
}

}  // namespace

ConsensusResult consensus_align(const PointCloud& src, const PointCloud& dst,
                                const CorrespondenceSet& pairs, const ConsensusConfig& config) {
  if (pairs.size() < 3) {
    throw Error(ErrorCode::kDegenerateCorrespondences,
                "rigid_align needs at least 3 pairs, got " + std::to_string(pairs.size()));
  }
  if (!config.enabled) return {rigid_align(src, dst, pairs), pairs};

  const double limit_sq = config.inlier_distance * config.inlier_distance;
  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
  std::size_t best_count = 0;
  RigidTransform best;
  std::size_t budget = config.iterations;
  for (std::size_t it = 0; it < budget; ++it) {
    const std::size_t a = pick(rng);
    const std::size_t b = pick(rng);
    const std::size_t c = pick(rng);
    if (a == b || b == c || a == c) continue;
    const std::array<Point3, 3> s{src[pairs[a].src], src[pairs[b].src], src[pairs[c].src]};
    const std::array<Point3, 3> d{dst[pairs[a].dst], dst[pairs[b].dst], dst[pairs[c].dst]};
    // Triangles must agree in shape before an SVD is worth it.
    if ((s[1] - s[0]).cross(s[2] - s[0]).norm() < 1e-6) continue;
    bool congruent = true;
    for (int i = 0; i < 3 && congruent; ++i) {
      const int j = (i + 1) % 3;
      congruent = std::abs((s[i] - s[j]).norm() - (d[i] - d[j]).norm()) < 2.0 * config.inlier_distance;
    }
    if (!congruent) continue;
    RigidTransform t;
    try {
      t = rigid_align(s, d);
    } catch (const Error&) {
      continue;
    }
    std::size_t count = 0;
    for (const auto& p : pairs) count += (t.apply(src[p.src]) - dst[p.dst]).squaredNorm() < limit_sq;
    if (count > best_count) {
      best_count = count;
      best = t;
      const double w = static_cast<double>(count) / static_cast<double>(pairs.size());
      const double miss = 1.0 - w * w * w;
      if (miss <= 0.0) break;
      const double needed = std::ceil(std::log(1.0 - config.confidence) / std::log(miss));
      if (needed < static_cast<double>(budget)) budget = std::max(it + 1, static_cast<std::size_t>(needed));
    }
  }
  if (best_count < 3) return {rigid_align(src, dst, pairs), pairs};

  ConsensusResult out{best, agreeing(src, dst, pairs, best, limit_sq)};
  for (std::size_t r = 0; r < config.refinements; ++r) {
    RigidTransform refit;
    try {
      refit = rigid_align(src, dst, out.inliers);
    } catch (const Error&) {
      break;
    }
    auto next = agreeing(src, dst, pairs, refit, limit_sq);
    if (next.size() < 3) break;
    const bool same = next.size() == out.inliers.size() &&
                      std::equal(next.begin(), next.end(), out.inliers.begin(), [](const auto& x, const auto& y) {
                        return x.src == y.src && x.dst == y.dst;
                      });
    out.transform = refit;
    out.inliers = std::move(next);
    if (same) break;
  }
  out.transform = rigid_align(src, dst, out.inliers);
  return out;
}

IcpResult icp(const PointCloud& src, const PointCloud& dst, const IcpConfig& config,
              const RigidTransform& initial) {
  const KdIndex index(dst);
  return icp(src, index, config, initial);
}

IcpResult icp(const PointCloud& src, const KdIndex& dst_index, const IcpConfig& config,
              const RigidTransform& initial) {
  if (src.empty() || dst_index.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "icp needs non-empty clouds");
  }
  const double gate2 = config.max_pair_distance * config.max_pair_distance;
  IcpResult result;
  result.transform = initial;

  std::vector<Point3> paired_src;
  std::vector<Point3> paired_dst;
  paired_src.reserve(src.size());
  paired_dst.reserve(src.size());

  for (;;) {
    paired_src.clear();
    paired_dst.clear();
    double cost = 0.0;
    for (const auto& p : src) {
      const Point3 moved = result.transform.apply(p);
      const Neighbor nn = *dst_index.nearest(moved);
      if (nn.squared_distance <= gate2) {
        cost += nn.squared_distance;
        paired_src.push_back(p);
        paired_dst.push_back(dst_index.point(nn.index));
      } else {
        cost += gate2;
      }
    }
    const double residual = std::sqrt(cost / static_cast<double>(src.size()));
    if (!result.residuals.empty() && result.residuals.back() - residual < config.tolerance) {
      result.residuals.push_back(residual);
      result.converged = true;
      break;
    }
    result.residuals.push_back(residual);
    if (paired_src.empty() || result.iterations >= config.max_iterations) break;

    result.transform = rigid_align(paired_src, paired_dst);
    ++result.iterations;
  }
  return result;
}

}  // namespace pointflow
