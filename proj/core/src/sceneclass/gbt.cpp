#include "pointflow/sceneclass/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pointflow/core/error.hpp"

namespace pointflow::scene {

namespace {

constexpr std::uint32_t kGbtVersion = 1;

double sigmoid(double m) {
  if (m >= 0.0) return 1.0 / (1.0 + std::exp(-m));
  const double e = std::exp(m);
  return e / (1.0 + e);
}

struct SplitCandidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

struct NodeStats {
  double grad = 0.0;
  double hess = 0.0;
};

double score(double g, double h, double lambda) { return g * g / (h + lambda); }

}  // namespace

double RegressionTree::predict(const SceneFeature& x) const {
  std::int32_t id = 0;
  while (nodes[id].feature >= 0) {
    const auto& n = nodes[id];
    id = x[n.feature] < n.threshold ? n.left : n.right;
  }
  return nodes[id].value;
}

std::size_t RegressionTree::split_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature >= 0; }));
}

std::size_t RegressionTree::leaf_count() const { return nodes.size() - split_count(); }

double GbtModel::margin(const SceneFeature& x) const {
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict(x);
  return base_score + learning_rate * sum;
}

double GbtModel::predict_proba(const SceneFeature& x) const { return sigmoid(margin(x)); }

GbtModel gbt_fit(std::span<const SceneFeature> rows, std::span<const std::uint8_t> labels,
                 const GbtConfig& config) {
  if (rows.size() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, "feature rows and labels differ in length");
  }
  const std::size_t n = rows.size();
  const auto positives = static_cast<std::size_t>(std::count_if(
      labels.begin(), labels.end(), [](std::uint8_t y) { return y != 0; }));
  if (positives == 0 || positives == n) {
    throw Error(ErrorCode::kSingleClassData, "training labels contain a single class");
  }

  GbtModel model;
  model.learning_rate = config.learning_rate;
  model.max_depth = config.max_depth;
  const double prior = static_cast<double>(positives) / static_cast<double>(n);
  model.base_score = std::log(prior / (1.0 - prior));

  // Rows sorted by value once per feature; ties keep row order.
  std::array<std::vector<std::uint32_t>, kSceneFeatureWidth> sorted;
  for (std::size_t f = 0; f < kSceneFeatureWidth; ++f) {
    sorted[f].resize(n);
    std::iota(sorted[f].begin(), sorted[f].end(), 0u);
    std::stable_sort(sorted[f].begin(), sorted[f].end(),
                     [&](std::uint32_t a, std::uint32_t b) { return rows[a][f] < rows[b][f]; });
  }

  std::vector<double> margin(n, model.base_score);
  std::vector<double> grad(n);
  std::vector<double> hess(n);
  std::vector<std::int32_t> node_of(n);
  const double lambda = config.l2_regularization;

  for (std::size_t round = 0; round < config.num_trees; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margin[i]);
      grad[i] = p - (labels[i] != 0 ? 1.0 : 0.0);
      hess[i] = std::max(p * (1.0 - p), 1e-16);
    }
    RegressionTree tree;
    tree.nodes.push_back({});
    std::fill(node_of.begin(), node_of.end(), 0);
    std::vector<std::int32_t> frontier{0};

    for (std::size_t depth = 0; depth < config.max_depth && !frontier.empty(); ++depth) {
      // Slot per node id for the current frontier.
      std::vector<std::int32_t> slot(tree.nodes.size(), -1);
      for (std::size_t s = 0; s < frontier.size(); ++s) slot[frontier[s]] = static_cast<std::int32_t>(s);
      std::vector<NodeStats> totals(frontier.size());
      for (std::size_t i = 0; i < n; ++i) {
        const std::int32_t s = node_of[i] >= 0 ? slot[node_of[i]] : -1;
        if (s < 0) continue;
        totals[s].grad += grad[i];
        totals[s].hess += hess[i];
      }
      std::vector<SplitCandidate> best(frontier.size());
      for (std::size_t f = 0; f < kSceneFeatureWidth; ++f) {
        std::vector<NodeStats> left(frontier.size());
        std::vector<double> last_value(frontier.size(), -std::numeric_limits<double>::infinity());
        for (std::uint32_t i : sorted[f]) {
          const std::int32_t s = node_of[i] >= 0 ? slot[node_of[i]] : -1;
          if (s < 0) continue;
          const double v = rows[i][f];
          // Candidate boundary between last_value and v.
          if (v > last_value[s] && left[s].hess >= config.min_child_hessian) {
            const double gl = left[s].grad;
            const double hl = left[s].hess;
            const double gr = totals[s].grad - gl;
            const double hr = totals[s].hess - hl;
            if (hr >= config.min_child_hessian) {
              const double gain = score(gl, hl, lambda) + score(gr, hr, lambda) -
                                  score(totals[s].grad, totals[s].hess, lambda);
              if (gain > best[s].gain + 1e-12) {
                best[s] = {gain, static_cast<int>(f), 0.5 * (last_value[s] + v)};
              }
            }
          }
          left[s].grad += grad[i];
          left[s].hess += hess[i];
          last_value[s] = v;
        }
      }
      std::vector<std::int32_t> next;
      for (std::size_t s = 0; s < frontier.size(); ++s) {
        const std::int32_t id = frontier[s];
        if (best[s].feature < 0) continue;
        const auto left_id = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes.push_back({});
        tree.nodes[id].feature = best[s].feature;
        tree.nodes[id].threshold = best[s].threshold;
        tree.nodes[id].left = left_id;
        tree.nodes[id].right = left_id + 1;
        next.push_back(left_id);
        next.push_back(left_id + 1);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const std::int32_t id = node_of[i];
        const auto& node = tree.nodes[id];
        if (node.feature >= 0) node_of[i] = rows[i][node.feature] < node.threshold ? node.left : node.right;
      }
      frontier = std::move(next);
    }

    std::vector<NodeStats> leaf_stats(tree.nodes.size());
    for (std::size_t i = 0; i < n; ++i) {
      leaf_stats[node_of[i]].grad += grad[i];
      leaf_stats[node_of[i]].hess += hess[i];
    }
    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
      auto& node = tree.nodes[id];
      if (node.feature < 0) node.value = -leaf_stats[id].grad / (leaf_stats[id].hess + lambda);
    }
    for (std::size_t i = 0; i < n; ++i) {
      margin[i] += model.learning_rate * tree.nodes[node_of[i]].value;
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

void write_gbt_model(io::ByteWriter& out, const GbtModel& model) {
  out.magic("PFGB");
  out.u32(kGbtVersion);
  out.f64(model.base_score);
  out.f64(model.learning_rate);
  out.u32(static_cast<std::uint32_t>(model.max_depth));
  out.u32(static_cast<std::uint32_t>(model.trees.size()));
  for (const auto& tree : model.trees) {
    out.u32(static_cast<std::uint32_t>(tree.nodes.size()));
    for (const auto& node : tree.nodes) {
      out.i32(node.feature);
      out.f64(node.threshold);
      out.i32(node.left);
      out.i32(node.right);
      out.f64(node.value);
    }
  }
}

GbtModel read_gbt_model(io::ByteReader& in) {
  in.expect_magic("PFGB");
  const std::uint32_t version = in.u32();
  if (version != kGbtVersion) {
    throw Error(ErrorCode::kMalformedFile, "unsupported tree model version " + std::to_string(version));
  }
  GbtModel model;
  model.base_score = in.f64();
  model.learning_rate = in.f64();
  model.max_depth = in.u32();
  const std::uint32_t count = in.u32();
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::size_t at = in.offset();
    const std::uint32_t nodes = in.u32();
    if (nodes == 0 || static_cast<std::uint64_t>(nodes) * 28 > in.remaining()) {
      throw Error(ErrorCode::kTruncatedRecord, "tree record truncated at byte offset " + std::to_string(at));
    }
    RegressionTree tree;
    tree.nodes.resize(nodes);
    for (auto& node : tree.nodes) {
      node.feature = in.i32();
      node.threshold = in.f64();
      node.left = in.i32();
      node.right = in.i32();
      node.value = in.f64();
    }
    for (std::int32_t id = 0; id < static_cast<std::int32_t>(nodes); ++id) {
      const auto& node = tree.nodes[id];
      const bool leaf = node.feature < 0;
      // Children always follow their parent, which rules out cycles.
      const auto valid = [&](std::int32_t c) { return c > id && c < static_cast<std::int32_t>(nodes); };
      if (!leaf && (node.feature >= static_cast<std::int32_t>(kSceneFeatureWidth) || !valid(node.left) ||
                    !valid(node.right))) {
        throw Error(ErrorCode::kMalformedFile, "invalid tree node near byte offset " + std::to_string(at));
      }
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

void save_gbt_model(const std::filesystem::path& path, const GbtModel& model) {
  io::ByteWriter out;
  write_gbt_model(out, model);
  io::write_file(path, out.bytes());
}

GbtModel load_gbt_model(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  io::ByteReader in(bytes);
  return read_gbt_model(in);
}

}  // namespace pointflow::scene
