// pointflow: train, estimate, synth, ablate, audit, bench.
//
// Reports go to stdout as JSON. Failures print "pointflow: <stage>: <code>:
// <message>" on stderr and exit with 2; CLI11 usage errors keep its own codes.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pointflow/core/error.hpp"
#include "pointflow/flow/flow_field.hpp"
#include "pointflow/flow/pipeline.hpp"
#include "pointflow/harness/audit.hpp"
#include "pointflow/harness/config_file.hpp"
#include "pointflow/harness/evaluation.hpp"
#include "pointflow/harness/metrics.hpp"
#include "pointflow/harness/scan_io.hpp"
#include "pointflow/harness/training.hpp"
#include "scene_dir.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace pointflow;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "key = value settings file")->check(CLI::ExistingFile);
  cmd->add_option("--set", c.sets, "override one setting, key=value (repeatable)");
}

harness::Settings load_settings(const Common& c) {
  harness::Settings s;
  if (!c.config.empty()) harness::apply_config_file(s, c.config);
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kInvalidConfig, "--set expects key=value: " + kv);
    auto trim = [](std::string v) {
      const auto b = v.find_first_not_of(" \t");
      const auto e = v.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
    };
    harness::apply_setting(s, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  return s;
}

json settings_json(const harness::Settings& s) {
  json j = json::object();
  for (const auto& [k, v] : harness::describe_settings(s)) j[k] = v;
  return j;
}

json metrics_json(const harness::MetricsReport& m) {
  return {{"epe3d", m.epe3d},           {"acc3ds", m.acc3ds},         {"acc3dr", m.acc3dr},
          {"outliers", m.outlier_frac}, {"mae_rad", m.mae},           {"n_evaluated", m.n_evaluated},
          {"mae_excluded", m.mae_excluded}};
}

json timings_json(const std::vector<flow::StageTiming>& timings) {
  json j = json::object();
  for (const auto& t : timings) j[t.stage] = t.seconds;
  return j;
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

// Models directory layout.
fs::path hop_path(const fs::path& dir) { return dir / "hop.pfh"; }
fs::path gbt_path(const fs::path& dir) { return dir / "gbt.pfg"; }

harness::TrainedModels load_models(const fs::path& dir) {
  return {features::load_hop_model(hop_path(dir)), scene::load_gbt_model(gbt_path(dir))};
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = first + i;
  return out;
}

// Loads --models, or trains on synthetic scenes when none were given.
harness::TrainedModels obtain_models(const std::string& dir, std::size_t train_scenes,
                                     const harness::Settings& s) {
  if (!dir.empty()) return load_models(dir);
  return harness::train_synthetic(harness::training_seeds(train_scenes), s);
}

json suite_json(const harness::SuiteReport& r) {
  json scenes = json::array();
  for (const auto& o : r.scenes) {
    json e = {{"seed", o.seed}, {"points", o.points}, {"moving_fraction", o.moving_fraction}};
    if (o.error.empty()) {
      e["metrics"] = metrics_json(o.metrics);
      e["ego_translation_error"] = o.ego.translation;
      e["ego_rotation_error_deg"] = o.ego.rotation_deg;
      e["motions"] = o.motions;
      e["demoted"] = o.demoted;
      e["seconds"] = o.seconds;
    } else {
      e["error"] = o.error;
    }
    scenes.push_back(std::move(e));
  }
  return {{"mean",
           {{"epe3d", r.mean_epe3d},
            {"acc3ds", r.mean_acc3ds},
            {"acc3dr", r.mean_acc3dr},
            {"outliers", r.mean_outliers},
            {"mae_rad", r.mean_mae}}},
          {"max_seconds", r.max_seconds},
          {"failures", r.failures},
          {"scenes", std::move(scenes)}};
}

// ---- subcommands ----

struct TrainArgs {
  Common common;
  std::size_t scenes = 4;
  std::uint64_t first_seed = 1000;
  std::vector<std::string> scene_dirs;
  std::string out;
};

int run_train(const TrainArgs& a) {
  const auto s = load_settings(a.common);
  harness::TrainedModels m;
  json source;
  if (!a.scene_dirs.empty()) {
    std::vector<harness::SyntheticScene> scenes;
    for (const auto& d : a.scene_dirs) scenes.push_back(cli::read_scene_dir(d));
    m = harness::train_models(scenes, s);
    source = {{"scene_dirs", a.scene_dirs}};
  } else {
    m = harness::train_synthetic(seed_range(a.first_seed, a.scenes), s);
    source = {{"synthetic_seeds", seed_range(a.first_seed, a.scenes)}};
  }
  fs::create_directories(a.out);
  features::save_hop_model(hop_path(a.out), m.hop);
  scene::save_gbt_model(gbt_path(a.out), m.gbt);
  emit({{"command", "train"},
        {"source", source},
        {"hop_model", hop_path(a.out).string()},
        {"gbt_model", gbt_path(a.out).string()},
        {"feature_width", m.hop.feature_width()},
        {"kernel_weights", m.hop.kernel_weight_count()},
        {"trees", m.gbt.trees.size()}});
  return 0;
}

struct SynthArgs {
  Common common;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "ply";
};

int run_synth(const SynthArgs& a) {
  const auto s = load_settings(a.common);
  const auto format = harness::parse_scan_format(a.format);
  if (!format) throw Error(ErrorCode::kInvalidArgument, "unknown scan format " + a.format);
  const auto scene = harness::generate_scene(a.seed, s.scene);
  cli::write_scene_dir(a.out, scene, a.seed, *format);
  emit({{"command", "synth"},
        {"seed", a.seed},
        {"dir", a.out},
        {"points_t", scene.x_t.size()},
        {"points_t1", scene.x_t1.size()},
        {"objects", scene.gt_object_motions.size()},
        {"moving_fraction", scene.moving_fraction()},
        {"consistency_error", harness::scene_consistency_error(scene)}});
  return 0;
}

struct EstimateArgs {
  Common common;
  std::string src, dst, scene, format, models, out, gt;
};

int run_estimate(EstimateArgs a, const CLI::App& cmd) {
  const auto s = load_settings(a.common);
  PointCloud x_t, x_t1;
  if (!a.scene.empty()) {
    const auto files = cli::find_scene_files(a.scene);
    x_t = harness::load_scan(files.x_t);
    x_t1 = harness::load_scan(files.x_t1);
  } else {
    if (a.src.empty() || a.dst.empty()) throw Error(ErrorCode::kInvalidArgument, "need --scene or --src and --dst");
    if (a.format.empty()) {
      x_t = harness::load_scan(a.src);
      x_t1 = harness::load_scan(a.dst);
    } else {
      const auto f = harness::parse_scan_format(a.format);
      if (!f) throw Error(ErrorCode::kInvalidArgument, "unknown scan format " + a.format);
      x_t = harness::load_scan(a.src, *f);
      x_t1 = harness::load_scan(a.dst, *f);
    }
  }
  const auto m = load_models(a.models);
  const auto r = flow::run_pipeline(x_t, x_t1, m.hop, m.gbt, s.pipeline);
  flow::save_flow_field(a.out, r.flow);

  json report = {{"command", "estimate"},
                 {"flow_file", a.out},
                 {"points_t", x_t.size()},
                 {"points_t1", x_t1.size()},
                 {"ego", cli::to_json(r.ego.transform)},
                 {"ego_inliers", r.ego.inliers.size()},
                 {"moving_t", r.labels_t.moving_count()},
                 {"moving_t1", r.labels_t1.moving_count()},
                 {"clusters_t", r.clusters_t.cluster_count()},
                 {"clusters_t1", r.clusters_t1.cluster_count()},
                 {"objects", r.motions.size()},
                 {"demoted", r.demoted},
                 {"events", r.events},
                 {"timings", timings_json(r.timings)}};

  const bool want_gt = cmd.count("--gt") > 0;
  if (want_gt) {
    const std::string dir = a.gt.empty() ? a.scene : a.gt;
    if (dir.empty()) throw Error(ErrorCode::kInvalidArgument, "--gt needs a scene directory");
    const auto gt = cli::read_scene_dir(dir);
    if (gt.gt_flow.size() != r.flow.size()) throw Error(ErrorCode::kLengthMismatch, "ground truth does not match X_t");
    report["metrics"] = metrics_json(harness::compute_metrics(r.flow.vectors, gt.gt_flow));
    report["ego_error"] = {{"translation", harness::pose_error(r.ego.transform, gt.gt_ego).translation},
                           {"rotation_deg", harness::pose_error(r.ego.transform, gt.gt_ego).rotation_deg}};
  }
  emit(report);
  return 0;
}

struct SuiteArgs {
  Common common;
  std::string models;
  std::size_t train_scenes = 4;
  std::size_t seeds = 20;
  std::uint64_t first_seed = 1;
};

struct AblateArgs {
  SuiteArgs suite;
  bool no_object_refine = false;
  bool no_flow_refine = false;
  std::string ego;
};

int run_ablate(const AblateArgs& a) {
  const auto base = load_settings(a.suite.common);
  const auto models = obtain_models(a.suite.models, a.suite.train_scenes, base);
  const auto seeds = seed_range(a.suite.first_seed, a.suite.seeds);

  std::vector<std::pair<std::string, harness::Settings>> variants{{"baseline", base}};
  const bool any = a.no_object_refine || a.no_flow_refine || !a.ego.empty();
  if (a.no_object_refine || !any) {
    auto v = base;
    v.pipeline.object_refinement = false;
    variants.emplace_back("no_object_refine", v);
  }
  if (a.no_flow_refine || !any) {
    auto v = base;
    v.pipeline.flow_refinement = false;
    variants.emplace_back("no_flow_refine", v);
  }
  if (!a.ego.empty() || !any) {
    auto v = base;
    harness::apply_setting(v, "pipeline.ego_method", a.ego.empty() ? "icp" : a.ego);
    variants.emplace_back("ego_" + (a.ego.empty() ? std::string("icp") : a.ego), v);
  }

  json runs = json::array();
  for (const auto& [name, v] : variants) {
    json run = {{"variant", name},
                {"object_refinement", v.pipeline.object_refinement},
                {"flow_refinement", v.pipeline.flow_refinement},
                {"ego_method", v.pipeline.ego_method == flow::EgoMethod::kIcp ? "icp" : "features"}};
    run["result"] = suite_json(harness::evaluate_suite(models, v, seeds));
    runs.push_back(std::move(run));
  }
  emit({{"command", "ablate"}, {"seeds", seeds}, {"runs", std::move(runs)}});
  return 0;
}

struct AuditArgs {
  Common common;
  std::string models;
  std::size_t train_scenes = 2;
  std::size_t points = 8192;
};

int run_audit(const AuditArgs& a) {
  auto s = load_settings(a.common);
  const auto models = obtain_models(a.models, a.train_scenes, s);
  harness::AuditConfig cfg;
  cfg.points = a.points;
  cfg.pipeline = s.pipeline;
  const auto r = harness::audit_model(models.hop, models.gbt, cfg);
  json terms = json::array();
  for (const auto& t : r.flop_terms) terms.push_back({{"name", t.name}, {"flops", t.flops}});
  emit({{"command", "audit"},
        {"parameters",
         {{"hop1_weights", r.hop1_weights},
          {"hop2_weights", r.hop2_weights},
          {"kernel_weights", r.kernel_weights},
          {"trees", r.trees},
          {"tree_thresholds", r.tree_thresholds},
          {"tree_leaves", r.tree_leaves},
          {"tree_params", r.tree_params},
          {"tree_params_inferred", r.tree_params_inferred},
          {"total", r.total_params},
          {"total_inferred_convention", r.total_params_inferred},
          {"convention", r.parameter_convention}}},
        {"flops",
         {{"points", r.flop_points},
          {"terms", std::move(terms)},
          {"total", r.flops_total},
          {"per_point", r.flops_per_point},
          {"convention", r.flop_convention}}}});
  return 0;
}

int run_bench(const SuiteArgs& a) {
  const auto s = load_settings(a.common);
  const auto t0 = std::chrono::steady_clock::now();
  const auto models = obtain_models(a.models, a.train_scenes, s);
  const double train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::map<std::string, double> stage_sum;
  std::vector<std::string> order;
  json per_scene = json::array();
  double total = 0.0;
  std::size_t points = 0;
  for (auto seed : seed_range(a.first_seed, a.seeds)) {
    const auto scene = harness::generate_scene(seed, s.scene);
    const auto start = std::chrono::steady_clock::now();
    const auto r = flow::run_pipeline(scene.x_t, scene.x_t1, models.hop, models.gbt, s.pipeline);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& t : r.timings) {
      if (!stage_sum.count(t.stage)) order.push_back(t.stage);
      stage_sum[t.stage] += t.seconds;
    }
    total += secs;
    points += scene.x_t.size();
    per_scene.push_back({{"seed", seed}, {"points", scene.x_t.size()}, {"seconds", secs}});
  }
  const double n = static_cast<double>(a.seeds);
  json stages = json::object();
  for (const auto& name : order) stages[name] = stage_sum[name] / n;
  emit({{"command", "bench"},
        {"train_seconds", train_seconds},
        {"scenes", a.seeds},
        {"mean_points", static_cast<double>(points) / n},
        {"mean_seconds", total / n},
        {"mean_stage_seconds", std::move(stages)},
        {"per_scene", std::move(per_scene)}});
  return 0;
}

int fail(const std::string& stage, const Error& e) {
  // what() already leads with the error code.
  std::fprintf(stderr, "pointflow: %s: %s\n", stage.c_str(), e.what());
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PointFlowHop scene flow: green-learning pipeline for LiDAR scan pairs"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "fit the hop model and scene classifier");
  add_common(c_train, train.common);
  c_train->add_option("--scenes", train.scenes, "synthetic training scenes");
  c_train->add_option("--first-seed", train.first_seed, "seed of the first training scene");
  c_train->add_option("--scene-dir", train.scene_dirs, "train from scene directories instead (repeatable)")
      ->check(CLI::ExistingDirectory);
  c_train->add_option("--out", train.out, "models directory")->required();

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "write a synthetic scan pair with ground truth");
  add_common(c_synth, synth.common);
  c_synth->add_option("--seed", synth.seed);
  c_synth->add_option("--out", synth.out, "scene directory")->required();
  c_synth->add_option("--format", synth.format, "kitti_bin | ply | xyz_text");

  EstimateArgs est;
  auto* c_est = app.add_subcommand("estimate", "scene flow for one scan pair");
  add_common(c_est, est.common);
  c_est->add_option("--src", est.src, "scan at time t")->check(CLI::ExistingFile);
  c_est->add_option("--dst", est.dst, "scan at time t+1")->check(CLI::ExistingFile);
  c_est->add_option("--format", est.format, "scan format when the extension is ambiguous");
  c_est->add_option("--scene", est.scene, "scene directory written by synth")->check(CLI::ExistingDirectory);
  c_est->add_option("--models", est.models, "models directory written by train")->required();
  c_est->add_option("--out", est.out, "FlowField output file")->required();
  c_est->add_option("--gt", est.gt, "score against a scene directory (defaults to --scene)")->expected(0, 1);

  AblateArgs abl;
  auto* c_abl = app.add_subcommand("ablate", "suite metrics with stages toggled");
  auto add_suite = [](CLI::App* cmd, SuiteArgs& s) {
    add_common(cmd, s.common);
    cmd->add_option("--models", s.models, "models directory (trained on the fly when omitted)");
    cmd->add_option("--train-scenes", s.train_scenes);
    cmd->add_option("--seeds", s.seeds, "evaluation scenes");
    cmd->add_option("--first-seed", s.first_seed);
  };
  add_suite(c_abl, abl.suite);
  c_abl->add_flag("--no-object-refine", abl.no_object_refine);
  c_abl->add_flag("--no-flow-refine", abl.no_flow_refine);
  c_abl->add_option("--ego", abl.ego, "ego method for the variant: features | icp");

  AuditArgs aud;
  auto* c_aud = app.add_subcommand("audit", "parameter and FLOP counts");
  add_common(c_aud, aud.common);
  c_aud->add_option("--models", aud.models, "models directory (trained on the fly when omitted)");
  c_aud->add_option("--train-scenes", aud.train_scenes);
  c_aud->add_option("--points", aud.points, "points per scan for the FLOP count");

  SuiteArgs bench;
  bench.seeds = 5;
  auto* c_bench = app.add_subcommand("bench", "per-stage timing over synthetic scenes");
  add_suite(c_bench, bench);

  Common settings_args;
  auto* c_set = app.add_subcommand("settings", "print every setting after overrides");
  add_common(c_set, settings_args);

  CLI11_PARSE(app, argc, argv);

  std::string stage = app.get_subcommands().front()->get_name();
  try {
    if (c_train->parsed()) return run_train(train);
    if (c_synth->parsed()) return run_synth(synth);
    if (c_est->parsed()) return run_estimate(est, *c_est);
    if (c_abl->parsed()) return run_ablate(abl);
    if (c_aud->parsed()) return run_audit(aud);
    if (c_bench->parsed()) return run_bench(bench);
    if (c_set->parsed()) {
      emit(settings_json(load_settings(settings_args)));
      return 0;
    }
  } catch (const StageError& e) {
    return fail(stage + "/" + e.stage(), e);
  } catch (const Error& e) {
    return fail(stage, e);
  } catch (const fs::filesystem_error& e) {
    return fail(stage, Error(ErrorCode::kIoError, e.what()));
  }
  return 3;
}
