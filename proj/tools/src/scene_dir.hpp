#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "pointflow/harness/scan_io.hpp"
#include "pointflow/harness/synthetic.hpp"

namespace pointflow::cli {

// A scene directory as written by `synth`:
//   x_t.<ext>, x_t1.<ext>      scans
//   labels_t.bin, labels_t1.bin one byte per point
//   gt_flow.pff                FlowField of the true per-point flow
//   scene.json                 seed, ego motion, object motions, counts
struct SceneFiles {
  std::filesystem::path x_t;
  std::filesystem::path x_t1;
  std::filesystem::path labels_t;
  std::filesystem::path labels_t1;
  std::filesystem::path gt_flow;
  std::filesystem::path meta;
};

SceneFiles scene_files(const std::filesystem::path& dir, harness::ScanFormat format);
// Finds whichever scan format the directory holds.
SceneFiles find_scene_files(const std::filesystem::path& dir);

void write_scene_dir(const std::filesystem::path& dir, const harness::SyntheticScene& scene,
                     std::uint64_t seed, harness::ScanFormat format);

// Scans, labels and ego motion; object bookkeeping is not restored.
harness::SyntheticScene read_scene_dir(const std::filesystem::path& dir);

nlohmann::ordered_json to_json(const RigidTransform& t);
RigidTransform transform_from_json(const nlohmann::json& j);

}  // namespace pointflow::cli
