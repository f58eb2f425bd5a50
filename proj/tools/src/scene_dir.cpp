#include "scene_dir.hpp"

#include <fstream>

#include "pointflow/core/error.hpp"
#include "pointflow/flow/flow_field.hpp"
#include "pointflow/sceneclass/scene_classifier.hpp"

namespace pointflow::cli {

namespace {

const char* extension(harness::ScanFormat format) {
  switch (format) {
    case harness::ScanFormat::kKittiBin: return ".bin";
    case harness::ScanFormat::kPly: return ".ply";
    case harness::ScanFormat::kXyzText: return ".xyz";
  }
  return ".ply";
}

}  // namespace

SceneFiles scene_files(const std::filesystem::path& dir, harness::ScanFormat format) {
  const std::string ext = extension(format);
  return {dir / ("x_t" + ext),   dir / ("x_t1" + ext), dir / "labels_t.bin",
          dir / "labels_t1.bin", dir / "gt_flow.pff",  dir / "scene.json"};
}

SceneFiles find_scene_files(const std::filesystem::path& dir) {
  for (auto f : {harness::ScanFormat::kPly, harness::ScanFormat::kKittiBin, harness::ScanFormat::kXyzText}) {
    auto files = scene_files(dir, f);
    if (std::filesystem::exists(files.x_t)) return files;
  }
  throw Error(ErrorCode::kIoError, "no x_t scan in " + dir.string());
}

nlohmann::ordered_json to_json(const RigidTransform& t) {
  nlohmann::ordered_json j;
  auto& r = j["rotation"] = nlohmann::ordered_json::array();
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) r.push_back(t.rotation(i, k));
  j["translation"] = {t.translation.x(), t.translation.y(), t.translation.z()};
  return j;
}

RigidTransform transform_from_json(const nlohmann::json& j) {
  RigidTransform t;
  const auto& r = j.at("rotation");
  const auto& tr = j.at("translation");
  if (r.size() != 9 || tr.size() != 3) throw Error(ErrorCode::kMalformedFile, "bad transform record");
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) t.rotation(i, k) = r.at(i * 3 + k).get<double>();
  t.translation = Point3(tr[0].get<double>(), tr[1].get<double>(), tr[2].get<double>());
  return t;
}

void write_scene_dir(const std::filesystem::path& dir, const harness::SyntheticScene& scene,
                     std::uint64_t seed, harness::ScanFormat format) {
  std::filesystem::create_directories(dir);
  const auto files = scene_files(dir, format);
  harness::save_scan(files.x_t, scene.x_t, format);
  harness::save_scan(files.x_t1, scene.x_t1, format);
  scene::save_labels(files.labels_t, scene.gt_labels_t);
  scene::save_labels(files.labels_t1, scene.gt_labels_t1);

  flow::FlowField gt;
  gt.vectors = scene.gt_flow;
  gt.provenance = scene.gt_object_t;
  gt.refined.assign(gt.vectors.size(), 0);
  flow::save_flow_field(files.gt_flow, gt);

  nlohmann::ordered_json meta;
  meta["seed"] = seed;
  meta["points_t"] = scene.x_t.size();
  meta["points_t1"] = scene.x_t1.size();
  meta["moving_fraction"] = scene.moving_fraction();
  meta["ego"] = to_json(scene.gt_ego);
  auto& objs = meta["object_motions"] = nlohmann::ordered_json::array();
  for (const auto& m : scene.gt_object_motions) objs.push_back(to_json(m));
  std::ofstream out(files.meta, std::ios::binary);
  out << meta.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + files.meta.string());
}

harness::SyntheticScene read_scene_dir(const std::filesystem::path& dir) {
  const auto files = find_scene_files(dir);
  harness::SyntheticScene s;
  s.x_t = harness::load_scan(files.x_t);
  s.x_t1 = harness::load_scan(files.x_t1);
  s.gt_labels_t = scene::load_labels(files.labels_t, s.x_t.size());
  s.gt_labels_t1 = scene::load_labels(files.labels_t1, s.x_t1.size());
  std::ifstream in(files.meta);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + files.meta.string());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(in);
    s.gt_ego = transform_from_json(meta.at("ego"));
    for (const auto& m : meta.at("object_motions")) s.gt_object_motions.push_back(transform_from_json(m));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, files.meta.string() + ": " + e.what());
  }
  if (std::filesystem::exists(files.gt_flow)) {
    const auto gt = flow::load_flow_field(files.gt_flow);
    if (gt.size() != s.x_t.size()) throw Error(ErrorCode::kLengthMismatch, "gt_flow does not match x_t");
    s.gt_flow = gt.vectors;
    s.gt_object_t = gt.provenance;
  }
  return s;
}

}  // namespace pointflow::cli
