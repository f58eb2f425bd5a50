#pragma once

#include <algorithm>
#include <numbers>
#include <random>
#include <vector>

#include "pointflow/core/types.hpp"

namespace pointflow::testing {

inline std::vector<Point3> random_points(std::mt19937_64& rng, std::size_t n, double extent = 10.0) {
  std::uniform_real_distribution<double> u(-extent, extent);
  std::vector<Point3> out(n);
  for (auto& p : out) p = Point3(u(rng), u(rng), u(rng));
  return out;
}

inline PointCloud random_cloud(std::mt19937_64& rng, std::size_t n, double extent = 10.0) {
  return PointCloud(random_points(rng, n, extent));
}

// Uniform rotation from a normalized Gaussian quaternion.
inline Matrix3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  double w = g(rng), x = g(rng), y = g(rng), z = g(rng);
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  w /= n, x /= n, y /= n, z /= n;
  Matrix3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w),
       2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w),
       2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y);
  return r;
}

inline RigidTransform random_transform(std::mt19937_64& rng, double max_translation = 5.0) {
  std::uniform_real_distribution<double> u(-max_translation, max_translation);
  RigidTransform t;
  t.rotation = random_rotation(rng);
  t.translation = Point3(u(rng), u(rng), u(rng));
  return t;
}

inline double deg(double d) { return d * std::numbers::pi / 180.0; }

// Brute-force k nearest by (squared distance, index).
inline std::vector<std::size_t> brute_knn(const std::vector<Point3>& pts, const Point3& q, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < pts.size(); ++i) d.emplace_back((pts[i] - q).squaredNorm(), i);
  std::sort(d.begin(), d.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < std::min(k, d.size()); ++i) out.push_back(d[i].second);
  return out;
}

}  // namespace pointflow::testing
