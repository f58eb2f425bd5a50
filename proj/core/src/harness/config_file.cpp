#include "pointflow/harness/config_file.hpp"

#include <charconv>
#include <functional>
#include <sstream>

#include "pointflow/core/binary_io.hpp"
#include "pointflow/core/error.hpp"

namespace pointflow::harness {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw Error(ErrorCode::kInvalidConfig, "'" + key + "' expects " + expected + ", got '" + value + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value, "a number");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  bad_value(key, value, "true/false");
}

template <typename T>
std::string show(const T& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  }
}

struct Binding {
  std::function<void(Settings&, const std::string&, const std::string&)> set;
  std::function<std::string(const Settings&)> get;
};

template <typename T, typename Access>
Binding bind(Access access) {
  Binding b;
  b.set = [access](Settings& s, const std::string& key, const std::string& value) {
    if constexpr (std::is_same_v<T, bool>) {
      access(s) = parse_bool(key, value);
    } else {
      access(s) = parse_number<T>(key, value);
    }
  };
  b.get = [access](const Settings& s) { return show(access(const_cast<Settings&>(s))); };
  return b;
}

#define PF_BIND(KEY, TYPE, EXPR) \
  {KEY, bind<TYPE>([](Settings& s) -> TYPE& { return EXPR; })}

const std::map<std::string, Binding>& bindings() {
  static const std::map<std::string, Binding> table = [] {
    std::map<std::string, Binding> t{
        PF_BIND("pipeline.ego.sample_size", std::size_t, s.pipeline.ego.sample_size),
        PF_BIND("pipeline.ego.top_matches", std::size_t, s.pipeline.ego.top_matches),
        PF_BIND("pipeline.ego.ratio_max", double, s.pipeline.ego.ratio_max),
        PF_BIND("pipeline.ego.eigen_neighbors", std::size_t, s.pipeline.ego.eigen_neighbors),
        PF_BIND("pipeline.ego.azimuth_bins", std::size_t, s.pipeline.ego.sampling.azimuth_bins),
        PF_BIND("pipeline.ego.range_bins", std::size_t, s.pipeline.ego.sampling.range_bins),
        PF_BIND("pipeline.ego.max_range", double, s.pipeline.ego.sampling.max_range),
        PF_BIND("pipeline.ego.trimmed_second_pass", bool, s.pipeline.ego.trimmed_second_pass),
        PF_BIND("pipeline.ego.trim_fraction", double, s.pipeline.ego.trim_fraction),
        PF_BIND("pipeline.ego_icp.max_iterations", int, s.pipeline.ego_icp.max_iterations),
        PF_BIND("pipeline.ego_icp.tolerance", double, s.pipeline.ego_icp.tolerance),
        PF_BIND("pipeline.ego_icp.max_pair_distance", double, s.pipeline.ego_icp.max_pair_distance),
        PF_BIND("pipeline.scene.voxel_size", double, s.pipeline.scene.voxel_size),
        PF_BIND("pipeline.scene.threshold", double, s.pipeline.scene.threshold),
        PF_BIND("pipeline.dbscan_eps", double, s.pipeline.dbscan_eps),
        PF_BIND("pipeline.dbscan_min_pts", std::size_t, s.pipeline.dbscan_min_pts),
        PF_BIND("pipeline.association_max_distance", double, s.pipeline.association_max_distance),
        PF_BIND("pipeline.object_refinement", bool, s.pipeline.object_refinement),
        PF_BIND("pipeline.refinement_radius", double, s.pipeline.refinement_radius),
        PF_BIND("pipeline.refinement_iterate", bool, s.pipeline.refinement_iterate),
        PF_BIND("pipeline.reassociate", bool, s.pipeline.reassociate),
        PF_BIND("pipeline.object_motion.min_object_points", std::size_t, s.pipeline.object_motion.min_object_points),
        PF_BIND("pipeline.object_motion.ratio_max", double, s.pipeline.object_motion.ratio_max),
        PF_BIND("pipeline.object_motion.ratio_test", bool, s.pipeline.object_motion.ratio_test),
        PF_BIND("pipeline.object_motion.keep_fraction", double, s.pipeline.object_motion.keep_fraction),
        PF_BIND("pipeline.flow_refinement", bool, s.pipeline.flow_refinement),
        PF_BIND("pipeline.refine.region_size", double, s.pipeline.refine.region_size),
        PF_BIND("pipeline.refine.min_region_points", std::size_t, s.pipeline.refine.min_region_points),
        PF_BIND("pipeline.refine.icp.max_iterations", int, s.pipeline.refine.icp.max_iterations),
        PF_BIND("pipeline.refine.icp.tolerance", double, s.pipeline.refine.icp.tolerance),
        PF_BIND("pipeline.refine.icp.max_pair_distance", double, s.pipeline.refine.icp.max_pair_distance),
        PF_BIND("scene.ground_radius", double, s.scene.ground_radius),
        PF_BIND("scene.ground_min_radius", double, s.scene.ground_min_radius),
        PF_BIND("scene.ground_height", double, s.scene.ground_height),
        PF_BIND("scene.ground_points", std::size_t, s.scene.ground_points),
        PF_BIND("scene.walls", std::size_t, s.scene.walls),
        PF_BIND("scene.buildings", std::size_t, s.scene.buildings),
        PF_BIND("scene.poles", std::size_t, s.scene.poles),
        PF_BIND("scene.parked_cars", std::size_t, s.scene.parked_cars),
        PF_BIND("scene.structure_density", double, s.scene.structure_density),
        PF_BIND("scene.pole_points", std::size_t, s.scene.pole_points),
        PF_BIND("scene.min_objects", std::size_t, s.scene.min_objects),
        PF_BIND("scene.max_objects", std::size_t, s.scene.max_objects),
        PF_BIND("scene.object_density", double, s.scene.object_density),
        PF_BIND("scene.object_clearance", double, s.scene.object_clearance),
        PF_BIND("scene.min_speed", double, s.scene.min_speed),
        PF_BIND("scene.max_speed", double, s.scene.max_speed),
        PF_BIND("scene.max_object_yaw", double, s.scene.max_object_yaw),
        PF_BIND("scene.min_ego_forward", double, s.scene.min_ego_forward),
        PF_BIND("scene.max_ego_forward", double, s.scene.max_ego_forward),
        PF_BIND("scene.max_ego_lateral", double, s.scene.max_ego_lateral),
        PF_BIND("scene.max_ego_yaw", double, s.scene.max_ego_yaw),
        PF_BIND("scene.ground_removal_height", double, s.scene.ground_removal_height),
        PF_BIND("scene.noise_sigma", double, s.scene.noise_sigma),
        PF_BIND("scene.dropout", double, s.scene.dropout),
        PF_BIND("hop.hop1_kernels", std::size_t, s.hop.hop1_kernels),
        PF_BIND("hop.hop2_kernels", std::size_t, s.hop.hop2_kernels),
        PF_BIND("hop.hop1_neighbors", std::size_t, s.hop.hop1_neighbors),
        PF_BIND("hop.hop2_neighbors", std::size_t, s.hop.hop2_neighbors),
        PF_BIND("hop.energy_threshold", double, s.hop.energy_threshold),
        PF_BIND("hop.shape_neighbors", std::size_t, s.hop.shape_neighbors),
        PF_BIND("hop.samples_per_cloud", std::size_t, s.hop.samples_per_cloud),
        PF_BIND("hop.seed", std::uint64_t, s.hop.seed),
        PF_BIND("gbt.num_trees", std::size_t, s.gbt.num_trees),
        PF_BIND("gbt.max_depth", std::size_t, s.gbt.max_depth),
        PF_BIND("gbt.learning_rate", double, s.gbt.learning_rate),
        PF_BIND("gbt.l2_regularization", double, s.gbt.l2_regularization),
        PF_BIND("gbt.min_child_hessian", double, s.gbt.min_child_hessian),
    };
    // Enumerations take names rather than numbers.
    t["hop.attributes"] = Binding{
        [](Settings& s, const std::string& key, const std::string& v) {
          if (v == "xyz") {
            s.hop.attributes = features::DescriptorAttributes::kRelativeCoordinates;
          } else if (v == "xyz_shape") {
            s.hop.attributes = features::DescriptorAttributes::kRelativeAndShape;
          } else {
            bad_value(key, v, "xyz or xyz_shape");
          }
        },
        [](const Settings& s) -> std::string {
          return s.hop.attributes == features::DescriptorAttributes::kRelativeCoordinates ? "xyz" : "xyz_shape";
        }};
    t["pipeline.ego_method"] = Binding{
        [](Settings& s, const std::string& key, const std::string& v) {
          if (v == "features") {
            s.pipeline.ego_method = flow::EgoMethod::kFeatureMatching;
          } else if (v == "icp") {
            s.pipeline.ego_method = flow::EgoMethod::kIcp;
          } else {
            bad_value(key, v, "features or icp");
          }
        },
        [](const Settings& s) -> std::string {
          return s.pipeline.ego_method == flow::EgoMethod::kIcp ? "icp" : "features";
        }};
    t["pipeline.convention"] = Binding{
        [](Settings& s, const std::string& key, const std::string& v) {
          if (v == "ego") {
            s.pipeline.convention = flow::FlowConvention::kEgo;
          } else if (v == "compensated") {
            s.pipeline.convention = flow::FlowConvention::kEgoCompensated;
          } else {
            bad_value(key, v, "ego or compensated");
          }
        },
        [](const Settings& s) -> std::string {
          return s.pipeline.convention == flow::FlowConvention::kEgo ? "ego" : "compensated";
        }};
    return t;
  }();
  return table;
}

#undef PF_BIND

}  // namespace

std::map<std::string, std::string> parse_config_text(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto end = text.find('\n');
    std::string_view line = text.substr(0, end);
    text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidConfig, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw Error(ErrorCode::kInvalidConfig, "line " + std::to_string(line_no) + ": empty key or value");
    }
    out[std::string(key)] = std::string(value);
  }
  return out;
}

void apply_setting(Settings& settings, const std::string& key, const std::string& value) {
  const auto& table = bindings();
  const auto it = table.find(key);
  if (it == table.end()) throw Error(ErrorCode::kInvalidConfig, "unknown setting '" + key + "'");
  it->second.set(settings, key, value);
}

void apply_config_file(Settings& settings, const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  const auto entries = parse_config_text({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
  for (const auto& [key, value] : entries) apply_setting(settings, key, value);
}

std::vector<std::pair<std::string, std::string>> describe_settings(const Settings& settings) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [key, binding] : bindings()) out.emplace_back(key, binding.get(settings));
  return out;
}

}  // namespace pointflow::harness
