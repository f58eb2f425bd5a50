#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pointflow/features/hop_model.hpp"
#include "pointflow/flow/pipeline.hpp"
#include "pointflow/harness/synthetic.hpp"
#include "pointflow/sceneclass/gbt.hpp"

namespace pointflow::harness {

/// Every tunable default in one place, so a text file or flags can override it.
struct Settings {
  flow::PipelineConfig pipeline;
  SceneConfig scene;
  features::HopModelConfig hop;
  scene::GbtConfig gbt;
};

/// `key = value` lines; '#' starts a comment. Keys are dotted, e.g.
/// `pipeline.dbscan_eps = 0.75` or `scene.noise_sigma = 0.01`. Later lines
/// win. Throws InvalidConfig naming the line on syntax errors.
std::map<std::string, std::string> parse_config_text(std::string_view text);

/// Applies one key. Throws InvalidConfig for unknown keys or bad values.
void apply_setting(Settings& settings, const std::string& key, const std::string& value);
void apply_config_file(Settings& settings, const std::filesystem::path& path);

/// Every known key with its current value, sorted by key.
std::vector<std::pair<std::string, std::string>> describe_settings(const Settings& settings);

}  // namespace pointflow::harness
