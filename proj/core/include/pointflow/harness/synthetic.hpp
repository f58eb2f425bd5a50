#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pointflow/core/types.hpp"

namespace pointflow::harness {

/// Parameters of the synthetic LiDAR-like scene generator. Distances in
/// meters, angles in degrees, densities in points per square meter.
struct SceneConfig {
  double ground_radius = 40.0;
  double ground_min_radius = 2.5;
  double ground_height = -1.7;
  std::size_t ground_points = 8000;

  std::size_t walls = 6;
  std::size_t buildings = 3;
  std::size_t poles = 10;
  std::size_t parked_cars = 3;
  double structure_density = 11.0;
  std::size_t pole_points = 60;

  std::size_t min_objects = 2;
  std::size_t max_objects = 6;
  double object_density = 10.0;
  double object_clearance = 0.5;    // gap between ground and car body
  double min_speed = 1.0;           // per frame
  double max_speed = 2.5;
  double max_object_yaw = 5.0;

  double min_ego_forward = 0.5;
  double max_ego_forward = 1.5;
  double max_ego_lateral = 0.2;
  double max_ego_yaw = 3.0;

  // Fixed motions instead of random draws. The object override is the
  // world-frame (X_t frame) motion given to every object.
  std::optional<RigidTransform> ego_override;
  std::optional<RigidTransform> object_motion_override;

  /// Points closer than this to the ground plane are discarded from both
  /// scans, as scene-flow benchmarks do. 0 keeps the ground.
  double ground_removal_height = 0.3;

  double noise_sigma = 0.02;
  double dropout = 0.05;

  /// Throws InvalidConfig on inconsistent values.
  void validate() const;
};

struct SyntheticScene {
  PointCloud x_t;
  PointCloud x_t1;
  std::vector<Point3> gt_flow;                // per X_t point
  std::vector<std::uint8_t> gt_labels_t;      // 1 = moving
  std::vector<std::uint8_t> gt_labels_t1;
  std::vector<std::int32_t> gt_object_t;      // object index or -1
  std::vector<std::int32_t> gt_object_t1;
  RigidTransform gt_ego;                      // X_t frame -> X_{t+1} frame
  std::vector<RigidTransform> gt_object_motions;  // in the X_{t+1} frame

  double moving_fraction() const;
};

/// Deterministic for a given (seed, config). Every surface point is sampled
/// once, moved by the ego (and object) motion, perturbed by independent
/// Gaussian noise per frame, then dropped independently per frame; X_{t+1} is
/// shuffled so indices do not line up.
SyntheticScene generate_scene(std::uint64_t seed, const SceneConfig& config = {});

/// Largest deviation of gt_flow from the flow implied by gt_ego and the object
/// motions (meters). Zero up to rounding for generated scenes.
double scene_consistency_error(const SyntheticScene& scene);

}  // namespace pointflow::harness
