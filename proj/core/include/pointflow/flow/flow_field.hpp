#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "pointflow/core/binary_io.hpp"
#include "pointflow/core/rigid.hpp"
#include "pointflow/core/types.hpp"
#include "pointflow/flow/object_motion.hpp"

namespace pointflow::flow {

inline constexpr std::int32_t kStatic = -1;

/// Per-point displacement of X_t, with the object (or static) it was attributed to.
struct FlowField {
  std::vector<Point3> vectors;
  std::vector<std::int32_t> provenance;  // kStatic or object id
  std::vector<std::uint8_t> refined;     // 1 when region ICP moved the point

  std::size_t size() const { return vectors.size(); }
};

struct DraftFlow {
  PointCloud positions;  // X̃_t′: X_t moved by T_ego, then T_obj for object points
  FlowField flow;
};

/// Static points move by T_ego; points of object j by compose(T_ego, T_obj_j).
/// Points whose object has no motion entry are treated as static. Flow is the
/// transformed minus the original X_t coordinates.
DraftFlow initialize_flow(const PointCloud& x_t, const RigidTransform& ego,
                          const std::vector<ObjectMotion>& motions,
                          const std::vector<std::int32_t>& membership);

struct RefineConfig {
  double region_size = 4.0;
  std::size_t min_region_points = 20;
  IcpConfig icp{10, 1e-3, 1.0};
};

/// Region-wise ICP: X̃_t′ is cut into non-overlapping cubes of region_size;
/// each cube with enough points is aligned to the X_{t+1} points in the cube
/// and its 26 neighbors, and the result is applied to its members. Regions
/// whose ICP fails keep the draft. Flow = refined position - X_t.
FlowField refine_flow(const PointCloud& x_t, const DraftFlow& draft, const PointCloud& x_t1,
                      const RefineConfig& config = {});

/// Binary layout (little-endian): "PFFF", u32 version, u64 n, n f32 triplets,
/// n provenance bytes (0 = static, otherwise min(object id + 1, 255)).
void write_flow_field(io::ByteWriter& out, const FlowField& flow);
FlowField read_flow_field(io::ByteReader& in);
void save_flow_field(const std::filesystem::path& path, const FlowField& flow);
FlowField load_flow_field(const std::filesystem::path& path);

}  // namespace pointflow::flow
