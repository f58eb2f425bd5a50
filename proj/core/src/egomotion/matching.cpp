#include "pointflow/egomotion/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pointflow/core/error.hpp"

namespace pointflow::ego {

CorrespondenceSet match_features(const Eigen::Ref<const RowMatrix>& src,
                                 const Eigen::Ref<const RowMatrix>& dst, std::size_t top_m,
                                 double ratio_max) {
  if (src.rows() == 0 || dst.rows() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "match_features needs non-empty feature sets");
  }
  if (src.cols() != dst.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "feature widths differ");
  }
  if (!(ratio_max > 0.0 && ratio_max <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "ratio_max must lie in (0, 1]");
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  CorrespondenceSet survivors;
  for (Eigen::Index i = 0; i < src.rows(); ++i) {
    double best = kInf;
    double second = kInf;
    Eigen::Index best_j = -1;
    for (Eigen::Index j = 0; j < dst.rows(); ++j) {
      const double d2 = (src.row(i) - dst.row(j)).squaredNorm();
      if (d2 < best) {
        second = best;
        best = d2;
        best_j = j;
      } else if (d2 < second) {
        second = d2;
      }
    }
    const double d1 = std::sqrt(best);
    const double dn = std::sqrt(second);
    double ratio = 0.0;
    if (dn == kInf) {
      ratio = 0.0;
    } else if (dn == 0.0) {
      ratio = 1.0;
    } else {
      ratio = d1 / dn;
    }
    if (ratio <= ratio_max) {
      survivors.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(best_j), d1});
    }
  }
  if (survivors.empty()) throw Error(ErrorCode::kNoCorrespondences, "no pair passed the ratio test");

  std::sort(survivors.begin(), survivors.end(), [](const Correspondence& a, const Correspondence& b) {
    return a.feature_distance < b.feature_distance ||
           (a.feature_distance == b.feature_distance && a.src < b.src);
  });
  std::vector<bool> consumed(static_cast<std::size_t>(dst.rows()), false);
  CorrespondenceSet out;
  for (const auto& c : survivors) {
    if (out.size() >= top_m) break;
    if (consumed[c.dst]) continue;
    consumed[c.dst] = true;
    out.push_back(c);
  }
  return out;
}

}  // namespace pointflow::ego
