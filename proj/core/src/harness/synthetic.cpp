#include "pointflow/harness/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <random>

#include "pointflow/core/error.hpp"

namespace pointflow::harness {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Box {
  Point3 center;       // center of the box volume
  Point3 half_extent;  // along local x (length), y (width), z (height)
  double heading = 0.0;
};

struct Surface {
  std::vector<Point3> points;
  std::int32_t object = -1;
};

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal(double sigma) { return sigma > 0.0 ? std::normal_distribution<double>(0.0, sigma)(rng_) : 0.0; }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

Point3 rotate_z(const Point3& p, double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return {c * p.x() - s * p.y(), s * p.x() + c * p.y(), p.z()};
}

// Points on the faces of a box, bottom face excluded, with the given density.
std::vector<Point3> sample_box(Sampler& rng, const Box& box, double density, bool include_top = true) {
  const Point3 e = 2.0 * box.half_extent;
  const double side_xz = e.x() * e.z();
  const double side_yz = e.y() * e.z();
  const double top = include_top ? e.x() * e.y() : 0.0;
  const double area = 2.0 * side_xz + 2.0 * side_yz + top;
  const auto count = static_cast<std::size_t>(std::round(area * density));
  std::vector<Point3> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double pick = rng.uniform(0.0, area);
    const double u = rng.uniform(-1.0, 1.0);
    const double v = rng.uniform(-1.0, 1.0);
    Point3 local;
    if (pick < side_xz) {
      local = {u, 1.0, v};
    } else if (pick < 2.0 * side_xz) {
      local = {u, -1.0, v};
    } else if (pick < 2.0 * side_xz + side_yz) {
      local = {1.0, u, v};
    } else if (pick < 2.0 * side_xz + 2.0 * side_yz) {
      local = {-1.0, u, v};
    } else {
      local = {u, v, 1.0};
    }
    out.push_back(box.center + rotate_z(local.cwiseProduct(box.half_extent), box.heading));
  }
  return out;
}

double segment_distance_2d(const Point3& p, const Point3& a, const Point3& b) {
  const Eigen::Vector2d pa(p.x() - a.x(), p.y() - a.y());
  const Eigen::Vector2d ab(b.x() - a.x(), b.y() - a.y());
  const double t = std::clamp(pa.dot(ab) / std::max(ab.squaredNorm(), 1e-12), 0.0, 1.0);
  return (pa - t * ab).norm();
}

struct Footprint {
  Point3 a;
  Point3 b;
  double radius;
};

bool clear_of(const std::vector<Footprint>& taken, const Footprint& f) {
  for (const auto& t : taken) {
    const double d = std::min({segment_distance_2d(f.a, t.a, t.b), segment_distance_2d(f.b, t.a, t.b),
                               segment_distance_2d(t.a, f.a, f.b), segment_distance_2d(t.b, f.a, f.b)});
    if (d < f.radius + t.radius) return false;
  }
  return true;
}

Box car_box(Sampler& rng, const Point3& ground_center, double heading, double clearance) {
  Box box;
  box.half_extent = {rng.uniform(3.6, 4.8) / 2.0, rng.uniform(1.6, 2.0) / 2.0, rng.uniform(1.0, 1.4) / 2.0};
  box.center = ground_center + Point3(0.0, 0.0, clearance + box.half_extent.z());
  box.heading = heading;
  return box;
}

Point3 polar(double r, double angle, double z) { return {r * std::cos(angle), r * std::sin(angle), z}; }

}  // namespace

void SceneConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kInvalidConfig, what);
  };
  require(ground_radius > ground_min_radius && ground_min_radius >= 0.0, "ground radius range is empty");
  require(min_objects <= max_objects, "min_objects exceeds max_objects");
  require(min_speed >= 0.0 && min_speed <= max_speed, "speed range is invalid");
  require(min_ego_forward <= max_ego_forward, "ego forward range is invalid");
  require(max_ego_lateral >= 0.0 && max_ego_yaw >= 0.0 && max_object_yaw >= 0.0, "negative motion bound");
  require(noise_sigma >= 0.0, "noise sigma must be >= 0");
  require(ground_removal_height >= 0.0, "ground removal height must be >= 0");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  require(structure_density > 0.0 && object_density > 0.0, "densities must be > 0");
}

double SyntheticScene::moving_fraction() const {
  if (gt_labels_t.empty()) return 0.0;
  return static_cast<double>(std::count(gt_labels_t.begin(), gt_labels_t.end(), std::uint8_t{1})) /
         static_cast<double>(gt_labels_t.size());
}

SyntheticScene generate_scene(std::uint64_t seed, const SceneConfig& config) {
  config.validate();
  Sampler rng(seed);
  const double ground = config.ground_height;
  std::vector<Surface> surfaces;
  std::vector<Footprint> taken;
  taken.push_back({Point3(-3.0, 0.0, 0.0), Point3(4.0, 0.0, 0.0), 2.0});  // ego lane

  // Moving objects and their world-frame motion (rotation about the box center).
  std::vector<RigidTransform> world_motion;
  const std::size_t n_objects = rng.index(config.min_objects, config.max_objects);
  for (std::size_t attempt = 0; world_motion.size() < n_objects && attempt < 500; ++attempt) {
    const Point3 start = polar(rng.uniform(6.0, 28.0), rng.uniform(-std::numbers::pi, std::numbers::pi), ground);
    const double heading = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const double speed = rng.uniform(config.min_speed, config.max_speed);
    const Point3 travel = rotate_z(Point3(speed, 0.0, 0.0), heading);
    const Footprint f{start, start + travel, 3.2};
    if (!clear_of(taken, f)) continue;
    taken.push_back(f);
    const Box box = car_box(rng, start, heading, config.object_clearance);
    const double yaw = rng.uniform(-config.max_object_yaw, config.max_object_yaw) * kDeg;
    RigidTransform m;
    m.rotation = axis_angle(Point3::UnitZ(), yaw);
    m.translation = box.center + travel - m.rotation * box.center;
    if (config.object_motion_override) m = *config.object_motion_override;
    surfaces.push_back({sample_box(rng, box, config.object_density), static_cast<std::int32_t>(world_motion.size())});
    world_motion.push_back(m);
  }

  auto place = [&](double min_r, double max_r, double half_length, double radius) -> std::pair<Point3, double> {
    for (int attempt = 0; attempt < 500; ++attempt) {
      const Point3 c = polar(rng.uniform(min_r, max_r), rng.uniform(-std::numbers::pi, std::numbers::pi), ground);
      const double heading = rng.uniform(-std::numbers::pi, std::numbers::pi);
      const Point3 d = rotate_z(Point3(half_length, 0.0, 0.0), heading);
      const Footprint f{c - d, c + d, radius};
      if (clear_of(taken, f)) {
        taken.push_back(f);
        return {c, heading};
      }
    }
    return {Point3(std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0), 0.0};
  };

  for (std::size_t i = 0; i < config.parked_cars; ++i) {
    const auto [c, heading] = place(6.0, 30.0, 2.4, 1.6);
    if (std::isnan(c.x())) continue;
    surfaces.push_back({sample_box(rng, car_box(rng, c, heading, config.object_clearance), config.object_density)});
  }
  for (std::size_t i = 0; i < config.walls; ++i) {
    const double length = rng.uniform(8.0, 20.0);
    const auto [c, heading] = place(10.0, 36.0, length / 2.0, 1.0);
    if (std::isnan(c.x())) continue;
    Box wall;
    wall.half_extent = {length / 2.0, 0.15, rng.uniform(3.0, 6.0) / 2.0};
    wall.center = c + Point3(0.0, 0.0, wall.half_extent.z());
    wall.heading = heading;
    surfaces.push_back({sample_box(rng, wall, config.structure_density, false)});
  }
  for (std::size_t i = 0; i < config.buildings; ++i) {
    const double size = rng.uniform(5.0, 10.0);
    const auto [c, heading] = place(14.0, 36.0, size / 2.0, size / 2.0 + 1.0);
    if (std::isnan(c.x())) continue;
    Box b;
    b.half_extent = {size / 2.0, rng.uniform(4.0, 8.0) / 2.0, rng.uniform(4.0, 8.0) / 2.0};
    b.center = c + Point3(0.0, 0.0, b.half_extent.z());
    b.heading = heading;
    surfaces.push_back({sample_box(rng, b, config.structure_density)});
  }
  for (std::size_t i = 0; i < config.poles; ++i) {
    const auto [c, heading] = place(5.0, 34.0, 0.0, 0.8);
    if (std::isnan(c.x())) continue;
    const double height = rng.uniform(3.0, 5.0);
    Surface pole;
    for (std::size_t j = 0; j < config.pole_points; ++j) {
      const double a = rng.uniform(-std::numbers::pi, std::numbers::pi);
      pole.points.push_back(c + Point3(0.15 * std::cos(a), 0.15 * std::sin(a), rng.uniform(0.0, height)));
    }
    surfaces.push_back(std::move(pole));
  }
  {
    // Radius uniform in [min, max] gives the 1/r density falloff of a spinning sensor.
    Surface g;
    for (std::size_t j = 0; j < config.ground_points; ++j) {
      g.points.push_back(polar(rng.uniform(config.ground_min_radius, config.ground_radius),
                               rng.uniform(-std::numbers::pi, std::numbers::pi), ground));
    }
    surfaces.push_back(std::move(g));
  }

  // Ego: the vehicle drives forward with a small lateral slip and yaw.
  const double yaw = rng.uniform(-config.max_ego_yaw, config.max_ego_yaw) * kDeg;
  RigidTransform vehicle;
  vehicle.rotation = axis_angle(Point3::UnitZ(), yaw);
  vehicle.translation = {rng.uniform(config.min_ego_forward, config.max_ego_forward),
                         rng.uniform(-config.max_ego_lateral, config.max_ego_lateral), 0.0};
  SyntheticScene scene;
  scene.gt_ego = config.ego_override ? *config.ego_override : vehicle.inverse();
  const RigidTransform ego_inv = scene.gt_ego.inverse();
  for (const auto& m : world_motion) {
    // Object motion expressed in the t+1 frame: E ∘ M ∘ E⁻¹.
    scene.gt_object_motions.push_back(compose(compose(ego_inv, m), scene.gt_ego));
  }

  std::vector<Point3> pts_t;
  std::vector<Point3> pts_t1;
  std::vector<Point3> flow;
  std::vector<std::int32_t> obj_t;
  std::vector<std::int32_t> obj_t1;
  std::bernoulli_distribution drop(config.dropout);
  // The ground plane is z = ground_height in the X_t frame and its image under
  // the ego motion in the X_{t+1} frame.
  const Point3 up_t1 = scene.gt_ego.rotation * Point3::UnitZ();
  const Point3 ground_t1 = scene.gt_ego.apply(Point3(0.0, 0.0, ground));
  auto grounded = [&](const Point3& p, int frame) {
    if (config.ground_removal_height <= 0.0) return false;
    const double h = frame == 0 ? p.z() - ground : (p - ground_t1).dot(up_t1);
    return h < config.ground_removal_height;
  };
  for (const auto& s : surfaces) {
    const RigidTransform full =
        s.object >= 0 ? compose(scene.gt_ego, scene.gt_object_motions[s.object]) : scene.gt_ego;
    for (const auto& p : s.points) {
      const Point3 seen_t = p + Point3(rng.normal(config.noise_sigma), rng.normal(config.noise_sigma),
                                       rng.normal(config.noise_sigma));
      const Point3 truth_t1 = full.apply(p);
      const Point3 seen_t1 = truth_t1 + Point3(rng.normal(config.noise_sigma), rng.normal(config.noise_sigma),
                                               rng.normal(config.noise_sigma));
      const bool keep_t = !drop(rng.engine());
      const bool keep_t1 = !drop(rng.engine());
      if (keep_t && !grounded(seen_t, 0)) {
        pts_t.push_back(seen_t);
        flow.push_back(full.apply(seen_t) - seen_t);
        obj_t.push_back(s.object);
      }
      if (keep_t1 && !grounded(seen_t1, 1)) {
        pts_t1.push_back(seen_t1);
        obj_t1.push_back(s.object);
      }
    }
  }

  std::vector<std::size_t> perm(pts_t1.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.index(0, i - 1)]);
  std::vector<Point3> shuffled(pts_t1.size());
  scene.gt_object_t1.resize(pts_t1.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    shuffled[i] = pts_t1[perm[i]];
    scene.gt_object_t1[i] = obj_t1[perm[i]];
  }

  scene.x_t = PointCloud(std::move(pts_t));
  scene.x_t1 = PointCloud(std::move(shuffled));
  scene.gt_flow = std::move(flow);
  scene.gt_object_t = std::move(obj_t);
  for (auto o : scene.gt_object_t) scene.gt_labels_t.push_back(o >= 0 ? 1 : 0);
  for (auto o : scene.gt_object_t1) scene.gt_labels_t1.push_back(o >= 0 ? 1 : 0);
  return scene;
}

double scene_consistency_error(const SyntheticScene& scene) {
  double worst = 0.0;
  for (std::size_t i = 0; i < scene.x_t.size(); ++i) {
    const auto o = scene.gt_object_t[i];
    const RigidTransform full =
        o >= 0 ? compose(scene.gt_ego, scene.gt_object_motions[static_cast<std::size_t>(o)]) : scene.gt_ego;
    worst = std::max(worst, (full.apply(scene.x_t[i]) - scene.x_t[i] - scene.gt_flow[i]).norm());
  }
  return worst;
}

}  // namespace pointflow::harness
