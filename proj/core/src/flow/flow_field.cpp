#include "pointflow/flow/flow_field.hpp"

#include <algorithm>
#include <map>

#include "pointflow/core/error.hpp"
#include "pointflow/core/kd_index.hpp"
#include "pointflow/core/voxel_grid.hpp"

namespace pointflow::flow {

namespace {

constexpr std::uint32_t kFlowVersion = 1;

}  // namespace

DraftFlow initialize_flow(const PointCloud& x_t, const RigidTransform& ego,
                          const std::vector<ObjectMotion>& motions,
                          const std::vector<std::int32_t>& membership) {
  if (membership.size() != x_t.size()) {
    throw Error(ErrorCode::kLengthMismatch, "membership does not match X_t");
  }
  std::map<std::int32_t, RigidTransform> composed;
  for (const auto& m : motions) composed[m.id] = compose(ego, m.transform);

  std::vector<Point3> positions(x_t.size());
  DraftFlow out;
  out.flow.vectors.resize(x_t.size());
  out.flow.provenance.assign(x_t.size(), kStatic);
  out.flow.refined.assign(x_t.size(), 0);
  for (std::size_t i = 0; i < x_t.size(); ++i) {
    const auto it = membership[i] >= 0 ? composed.find(membership[i]) : composed.end();
    if (it != composed.end()) {
      positions[i] = it->second.apply(x_t[i]);
      out.flow.provenance[i] = membership[i];
    } else {
      positions[i] = ego.apply(x_t[i]);
    }
    out.flow.vectors[i] = positions[i] - x_t[i];
  }
  out.positions = PointCloud(std::move(positions));
  return out;
}

FlowField refine_flow(const PointCloud& x_t, const DraftFlow& draft, const PointCloud& x_t1,
                      const RefineConfig& config) {
  if (!(config.region_size > 0.0)) throw Error(ErrorCode::kInvalidArgument, "region size must be > 0");
  if (draft.positions.size() != x_t.size()) {
    throw Error(ErrorCode::kLengthMismatch, "draft does not match X_t");
  }
  FlowField out = draft.flow;
  if (x_t1.empty()) return out;

  const VoxelGrid regions = voxelize(draft.positions, config.region_size);
  const VoxelGrid targets = voxelize(x_t1, config.region_size);
  std::vector<std::size_t> target_idx;

  for (const auto& region : regions.cells()) {
    if (region.members.size() < config.min_region_points) continue;
    target_idx.clear();
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          const VoxelKey key{region.key.x + dx, region.key.y + dy, region.key.z + dz};
          const auto cell = targets.find(key);
          if (cell < 0) continue;
          const auto& members = targets.cells()[static_cast<std::size_t>(cell)].members;
          target_idx.insert(target_idx.end(), members.begin(), members.end());
        }
      }
    }
    if (target_idx.size() < 3) continue;
    std::sort(target_idx.begin(), target_idx.end());

    const PointCloud src = draft.positions.select(region.members);
    const KdIndex target_index(x_t1.select(target_idx).points());
    IcpResult result;
    try {
      result = icp(src, target_index, config.icp);
    } catch (const Error&) {
      continue;
    }
    if (result.iterations == 0) continue;
    for (std::size_t i : region.members) {
      out.vectors[i] = result.transform.apply(draft.positions[i]) - x_t[i];
      out.refined[i] = 1;
    }
  }
  return out;
}

void write_flow_field(io::ByteWriter& out, const FlowField& flow) {
  out.magic("PFFF");
  out.u32(kFlowVersion);
  out.u64(flow.size());
  for (const auto& v : flow.vectors) {
    out.f32(static_cast<float>(v.x()));
    out.f32(static_cast<float>(v.y()));
    out.f32(static_cast<float>(v.z()));
  }
  for (std::size_t i = 0; i < flow.size(); ++i) {
    const std::int32_t p = i < flow.provenance.size() ? flow.provenance[i] : kStatic;
    out.u8(p < 0 ? 0 : static_cast<std::uint8_t>(std::min<std::int32_t>(p + 1, 255)));
  }
}

FlowField read_flow_field(io::ByteReader& in) {
  in.expect_magic("PFFF");
  const std::uint32_t version = in.u32();
  if (version != kFlowVersion) {
    throw Error(ErrorCode::kMalformedFile, "unsupported flow field version " + std::to_string(version));
  }
  const std::size_t at = in.offset();
  const std::uint64_t n = in.u64();
  if (n > in.remaining() / 13) {
    throw Error(ErrorCode::kTruncatedRecord, "flow field declares " + std::to_string(n) +
                                                 " points at byte offset " + std::to_string(at) +
                                                 " but holds only " + std::to_string(in.remaining()) +
                                                 " payload bytes");
  }
  FlowField flow;
  flow.vectors.resize(n);
  for (auto& v : flow.vectors) {
    const float x = in.f32();
    const float y = in.f32();
    const float z = in.f32();
    v = Point3(x, y, z);
  }
  flow.provenance.resize(n);
  for (auto& p : flow.provenance) p = static_cast<std::int32_t>(in.u8()) - 1;
  flow.refined.assign(n, 0);
  if (!in.at_end()) {
    throw Error(ErrorCode::kMalformedFile, "trailing bytes after flow field at byte offset " +
                                               std::to_string(in.offset()));
  }
  return flow;
}

void save_flow_field(const std::filesystem::path& path, const FlowField& flow) {
  io::ByteWriter out;
  write_flow_field(out, flow);
  io::write_file(path, out.bytes());
}

FlowField load_flow_field(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  io::ByteReader in(bytes);
  return read_flow_field(in);
}

}  // namespace pointflow::flow
