#include "pointflow/features/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pointflow/core/error.hpp"

namespace pointflow::features {

namespace {

double horizontal_range(const Point3& p) { return std::hypot(p.x(), p.y()); }

}  // namespace

std::size_t sampling_bin(const Point3& p, const SamplingConfig& config, double max_range) {
  const double azimuth = std::atan2(p.y(), p.x()) + std::numbers::pi;  // [0, 2pi]
  auto a = static_cast<std::size_t>(azimuth / (2.0 * std::numbers::pi) *
                                    static_cast<double>(config.azimuth_bins));
  a = std::min(a, config.azimuth_bins - 1);
  std::size_t r = 0;
  if (max_range > 0.0) {
    r = static_cast<std::size_t>(horizontal_range(p) / max_range *
                                 static_cast<double>(config.range_bins));
    r = std::min(r, config.range_bins - 1);
  }
  return a * config.range_bins + r;
}

std::vector<std::size_t> geometry_aware_sample(const PointCloud& cloud, std::size_t m,
                                               const std::vector<EigenFeatures>& eigen,
                                               const SamplingConfig& config) {
  if (eigen.size() != cloud.size()) {
    throw Error(ErrorCode::kLengthMismatch, "eigen features do not match cloud size");
  }
  if (config.azimuth_bins == 0 || config.range_bins == 0) {
    throw Error(ErrorCode::kInvalidArgument, "sampling needs at least one bin per axis");
  }
  double max_range = config.max_range;
  if (max_range <= 0.0) {
    for (const auto& p : cloud) max_range = std::max(max_range, horizontal_range(p));
  }

  std::vector<std::vector<std::size_t>> bins(config.azimuth_bins * config.range_bins);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (eigen[i].degenerate) continue;
    bins[sampling_bin(cloud[i], config, max_range)].push_back(i);
  }
  for (auto& bin : bins) {
    std::stable_sort(bin.begin(), bin.end(), [&](std::size_t a, std::size_t b) {
      return eigen[a].saliency() > eigen[b].saliency();
    });
  }

  std::vector<std::size_t> selected;
  selected.reserve(std::min(m, cloud.size()));
  for (std::size_t rank = 0; selected.size() < m; ++rank) {
    bool any = false;
    for (const auto& bin : bins) {
      if (rank >= bin.size()) continue;
      any = true;
      selected.push_back(bin[rank]);
      if (selected.size() == m) break;
    }
    if (!any) break;
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

}  // namespace pointflow::features
