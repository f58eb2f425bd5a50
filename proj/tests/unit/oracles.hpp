#pragma once

// Slow reference implementations shared by the unit and acceptance tests.
// Written from the definitions, without reusing library code.

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <vector>

#include "pointflow/core/types.hpp"
#include "pointflow/harness/metrics.hpp"
#include "pointflow/objects/objects.hpp"

namespace pointflow::testing {

// O(n^2) DBSCAN: core = at least min_pts within eps (self included), seeds in
// index order, breadth-first expansion.
inline std::vector<std::int32_t> reference_dbscan(const PointCloud& pts, double eps, std::size_t min_pts) {
  const std::size_t n = pts.size();
  std::vector<std::vector<std::size_t>> nbr(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if ((pts[i] - pts[j]).norm() <= eps) nbr[i].push_back(j);
  std::vector<std::int32_t> label(n, -2);
  std::int32_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] != -2 || nbr[i].size() < min_pts) continue;
    const std::int32_t c = next++;
    label[i] = c;
    std::deque<std::size_t> q{i};
    while (!q.empty()) {
      const auto p = q.front();
      q.pop_front();
      if (nbr[p].size() < min_pts) continue;
      for (auto j : nbr[p])
        if (label[j] == -2) {
          label[j] = c;
          q.push_back(j);
        }
    }
  }
  for (auto& l : label)
    if (l == -2) l = objects::kOutlier;
  return label;
}

// Same partition up to a renaming of cluster ids.
inline bool same_partition(const std::vector<std::int32_t>& a, const std::vector<std::int32_t>& b) {
  if (a.size() != b.size()) return false;
  std::map<std::int32_t, std::int32_t> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] == objects::kOutlier) != (b[i] == objects::kOutlier)) return false;
    if (a[i] == objects::kOutlier) continue;
    if (ab.emplace(a[i], b[i]).first->second != b[i]) return false;
    if (ba.emplace(b[i], a[i]).first->second != a[i]) return false;
  }
  return true;
}

// Per-point recomputation of the flow metrics. The angle uses acos of the
// normalized dot product, not the library's atan2 form.
inline harness::MetricsReport reference_metrics(const std::vector<Point3>& est, const std::vector<Point3>& gt) {
  const double eps = 1e-6;
  double epe = 0, s = 0, r = 0, o = 0, ang = 0;
  std::size_t n_ang = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double e = std::sqrt((est[i] - gt[i]).squaredNorm());
    const double rel = e / std::max(gt[i].norm(), eps);
    epe += e;
    s += (e < 0.05 || rel < 0.05);
    r += (e < 0.1 || rel < 0.1);
    o += (e > 0.3 || rel > 0.1);
    if (est[i].norm() >= eps && gt[i].norm() >= eps) {
      ang += std::acos(std::clamp(est[i].normalized().dot(gt[i].normalized()), -1.0, 1.0));
      ++n_ang;
    }
  }
  const double n = static_cast<double>(gt.size());
  harness::MetricsReport m;
  m.epe3d = epe / n;
  m.acc3ds = s / n;
  m.acc3dr = r / n;
  m.outlier_frac = o / n;
  m.mae = n_ang ? ang / static_cast<double>(n_ang) : 0.0;
  m.n_evaluated = gt.size();
  m.mae_excluded = gt.size() - n_ang;
  return m;
}

}  // namespace pointflow::testing
