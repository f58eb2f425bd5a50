#include "pointflow/features/hop_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pointflow/core/error.hpp"
#include "pointflow/features/eigen_features.hpp"

namespace pointflow::features {

namespace {

constexpr std::uint32_t kHopModelVersion = 1;

std::size_t clamp_k(std::size_t k, std::size_t n) { return n == 0 ? 0 : std::min(k, n - 1); }

std::vector<std::size_t> training_sample(std::size_t n, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (count >= n) return all;
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates keeps the draw independent of the standard library's shuffle.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

// Hop-2 input for one channel: octant means of the neighbors' hop-1 responses.
Eigen::VectorXd channel_descriptor(const PointCloud& cloud, std::span<const std::size_t> neighbors,
                                   std::size_t center, const Eigen::Ref<const RowMatrix>& hop1,
                                   Eigen::Index channel) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(8);
  std::array<int, 8> counts{};
  for (std::size_t j : neighbors) {
    const int o = octant_of(cloud[j] - cloud[center]);
    out[o] += hop1(static_cast<Eigen::Index>(j), channel);
    ++counts[o];
  }
  for (int o = 0; o < 8; ++o) {
    if (counts[o] > 0) out[o] /= static_cast<double>(counts[o]);
  }
  return out;
}

std::vector<std::vector<std::size_t>> neighbor_lists(const KdIndex& index, std::size_t k) {
  std::vector<std::vector<std::size_t>> lists(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) lists[i] = descriptor_neighbors(index, i, k);
  return lists;
}

RowMatrix hop1_responses(const HopModel& model, const PointCloud& cloud,
                         const std::vector<std::vector<std::size_t>>& neighbors,
                         const Eigen::Ref<const RowMatrix>& attributes) {
  const auto width = static_cast<Eigen::Index>(model.config.attribute_width());
  RowMatrix descriptors(static_cast<Eigen::Index>(cloud.size()), 8 * width);
  std::vector<Point3> offsets;
  RowMatrix attrs;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& nb = neighbors[i];
    offsets.clear();
    attrs.resize(static_cast<Eigen::Index>(nb.size()), width);
    for (std::size_t j = 0; j < nb.size(); ++j) {
      const Point3 offset = cloud[nb[j]] - cloud[i];
      offsets.push_back(offset);
      const auto row = static_cast<Eigen::Index>(j);
      attrs.row(row).head<3>() = offset.transpose();
      if (width > 3) attrs.row(row).tail(width - 3) = attributes.row(static_cast<Eigen::Index>(nb[j]));
    }
    descriptors.row(static_cast<Eigen::Index>(i)) = octant_pool(offsets, attrs).transpose();
  }
  return model.hop1.transform_rows(descriptors);
}

std::span<const std::size_t> first_k(const std::vector<std::size_t>& v, std::size_t k) {
  return {v.data(), std::min(k, v.size())};
}

}  // namespace

std::size_t HopModel::feature_width() const {
  std::size_t width = static_cast<std::size_t>(hop1.num_kernels());
  for (const auto& bank : hop2) width += static_cast<std::size_t>(bank.num_kernels());
  return width;
}

std::size_t HopModel::hop1_weight_count() const {
  return static_cast<std::size_t>(hop1.num_kernels() * hop1.input_dim());
}

std::size_t HopModel::hop2_weight_count() const {
  std::size_t total = 0;
  for (const auto& bank : hop2) total += static_cast<std::size_t>(bank.num_kernels() * bank.input_dim());
  return total;
}

std::size_t HopModel::kernel_weight_count() const { return hop1_weight_count() + hop2_weight_count(); }

RowMatrix descriptor_attributes(const PointCloud& cloud, const KdIndex& index,
                                const HopModelConfig& config) {
  if (config.attributes == DescriptorAttributes::kRelativeCoordinates || cloud.empty()) {
    return RowMatrix(static_cast<Eigen::Index>(cloud.size()), 0);
  }
  RowMatrix out(static_cast<Eigen::Index>(cloud.size()), 8);
  const std::size_t k = std::min(config.shape_neighbors, cloud.size());
  if (k < 3) {
    out.setZero();
    return out;
  }
  const auto eigen = eigen_features(cloud, index, k);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& ef = eigen[i];
    const auto row = static_cast<Eigen::Index>(i);
    if (ef.degenerate) {
      out.row(row).setZero();
      continue;
    }
    const double l1 = ef.eigenvalues[0];
    const double l2 = ef.eigenvalues[1];
    const double l3 = ef.eigenvalues[2];
    out(row, 0) = ef.linearity;
    out(row, 1) = ef.planarity;
    out(row, 2) = l3 / l1;                                    // sphericity
    out(row, 3) = std::cbrt(l1 * l2 * l3) / ef.eigen_sum;     // omnivariance (normalized)
    out(row, 4) = (l1 - l3) / l1;                             // anisotropy
    out(row, 5) = ef.eigen_sum;
    out(row, 6) = ef.eigen_entropy;
    out(row, 7) = l3 / ef.eigen_sum;                          // surface variation
  }
  return out;
}

RowMatrix hop1_descriptors(const PointCloud& cloud, const KdIndex& index,
                           const Eigen::Ref<const RowMatrix>& attributes,
                           std::span<const std::size_t> points, std::size_t k) {
  RowMatrix out(static_cast<Eigen::Index>(points.size()), 8 * (3 + attributes.cols()));
  for (std::size_t j = 0; j < points.size(); ++j) {
    out.row(static_cast<Eigen::Index>(j)) =
        octant_descriptor(cloud, attributes, index, points[j], clamp_k(k, cloud.size())).transpose();
  }
  return out;
}

HopModel hopmodel_fit(std::span<const PointCloud> training_clouds, const HopModelConfig& config) {
  if (config.hop1_kernels < 1 || config.hop2_kernels < 1) {
    throw Error(ErrorCode::kInvalidConfig, "hop models need at least one kernel per hop");
  }
  HopModel model;
  model.config = config;

  struct Prepared {
    const PointCloud* cloud;
    KdIndex index;
    RowMatrix attributes;
    std::vector<std::vector<std::size_t>> neighbors;
    std::vector<std::size_t> sample;
  };
  std::vector<Prepared> prepared;
  std::size_t total_samples = 0;
  for (std::size_t c = 0; c < training_clouds.size(); ++c) {
    const auto& cloud = training_clouds[c];
    if (cloud.size() < 2) continue;
    Prepared p{&cloud, KdIndex(cloud), {}, {}, {}};
    p.attributes = descriptor_attributes(cloud, p.index, config);
    p.neighbors = neighbor_lists(p.index, clamp_k(config.hop1_neighbors, cloud.size()));
    p.sample = training_sample(cloud.size(), config.samples_per_cloud, config.seed + c);
    total_samples += p.sample.size();
    prepared.push_back(std::move(p));
  }
  if (total_samples < 2) {
    throw Error(ErrorCode::kInsufficientSamples, "hop model training needs at least 2 points");
  }

  const auto width = static_cast<Eigen::Index>(8 * config.attribute_width());
  RowMatrix hop1_samples(static_cast<Eigen::Index>(total_samples), width);
  Eigen::Index row = 0;
  for (const auto& p : prepared) {
    const RowMatrix d = hop1_descriptors(*p.cloud, p.index, p.attributes, p.sample,
                                         config.hop1_neighbors);
    hop1_samples.middleRows(row, d.rows()) = d;
    row += d.rows();
  }
  model.hop1 = saab_fit(hop1_samples, static_cast<Eigen::Index>(config.hop1_kernels));

  const double total_energy = model.hop1.energies.sum();
  for (Eigen::Index c = 0; c < model.hop1.num_kernels(); ++c) {
    if (total_energy <= 0.0 || model.hop1.energies[c] >= config.energy_threshold * total_energy) {
      model.retained_channels.push_back(static_cast<std::size_t>(c));
    }
  }

  std::vector<RowMatrix> responses;
  responses.reserve(prepared.size());
  for (const auto& p : prepared) {
    responses.push_back(hop1_responses(model, *p.cloud, p.neighbors, p.attributes));
  }
  for (std::size_t channel : model.retained_channels) {
    RowMatrix samples(static_cast<Eigen::Index>(total_samples), 8);
    Eigen::Index r = 0;
    for (std::size_t pi = 0; pi < prepared.size(); ++pi) {
      const auto& p = prepared[pi];
      for (std::size_t i : p.sample) {
        samples.row(r++) = channel_descriptor(*p.cloud, first_k(p.neighbors[i], config.hop2_neighbors),
                                              i, responses[pi], static_cast<Eigen::Index>(channel))
                               .transpose();
      }
    }
    model.hop2.push_back(saab_fit(samples, static_cast<Eigen::Index>(config.hop2_kernels)));
  }
  return model;
}

RowMatrix extract_features(const HopModel& model, const PointCloud& cloud) {
  const KdIndex index(cloud);
  return extract_features(model, cloud, index);
}

RowMatrix extract_features(const HopModel& model, const PointCloud& cloud, const KdIndex& index) {
  const auto n = static_cast<Eigen::Index>(cloud.size());
  RowMatrix out(n, static_cast<Eigen::Index>(model.feature_width()));
  if (n == 0) return out;

  const std::size_t k = std::max(model.config.hop1_neighbors, model.config.hop2_neighbors);
  const auto neighbors = neighbor_lists(index, clamp_k(k, cloud.size()));
  const RowMatrix attributes = descriptor_attributes(cloud, index, model.config);

  std::vector<std::vector<std::size_t>> hop1_neighbors;
  const std::vector<std::vector<std::size_t>>* hop1_lists = &neighbors;
  if (model.config.hop1_neighbors < k) {
    hop1_neighbors.resize(neighbors.size());
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
      const auto s = first_k(neighbors[i], model.config.hop1_neighbors);
      hop1_neighbors[i].assign(s.begin(), s.end());
    }
    hop1_lists = &hop1_neighbors;
  }
  const RowMatrix hop1 = hop1_responses(model, cloud, *hop1_lists, attributes);
  out.leftCols(hop1.cols()) = hop1;

  Eigen::Index col = hop1.cols();
  RowMatrix pooled(n, 8);
  for (std::size_t b = 0; b < model.hop2.size(); ++b) {
    const auto channel = static_cast<Eigen::Index>(model.retained_channels[b]);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      pooled.row(i) = channel_descriptor(cloud, first_k(neighbors[idx], model.config.hop2_neighbors),
                                         idx, hop1, channel)
                          .transpose();
    }
    const RowMatrix r = model.hop2[b].transform_rows(pooled);
    out.middleCols(col, r.cols()) = r;
    col += r.cols();
  }
  return out;
}

namespace {

void write_bank(io::ByteWriter& out, const SaabKernelBank& bank) {
  out.u32(static_cast<std::uint32_t>(bank.num_kernels()));
  out.u32(static_cast<std::uint32_t>(bank.input_dim()));
  for (Eigen::Index r = 0; r < bank.kernels.rows(); ++r) {
    for (Eigen::Index c = 0; c < bank.kernels.cols(); ++c) out.f64(bank.kernels(r, c));
  }
  for (Eigen::Index c = 0; c < bank.mean.size(); ++c) out.f64(bank.mean[c]);
  for (Eigen::Index r = 0; r < bank.energies.size(); ++r) out.f64(bank.energies[r]);
  out.u32(static_cast<std::uint32_t>(bank.ac_energies.size()));
  for (Eigen::Index r = 0; r < bank.ac_energies.size(); ++r) out.f64(bank.ac_energies[r]);
  out.f64(bank.bias);
}

SaabKernelBank read_bank(io::ByteReader& in) {
  SaabKernelBank bank;
  const std::uint32_t rows = in.u32();
  const std::uint32_t cols = in.u32();
  if (static_cast<std::uint64_t>(rows) * cols * 8 > in.remaining()) {
    throw Error(ErrorCode::kTruncatedRecord,
                "kernel bank larger than remaining bytes at offset " + std::to_string(in.offset()));
  }
  bank.kernels.resize(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) bank.kernels(r, c) = in.f64();
  }
  bank.mean.resize(cols);
  for (std::uint32_t c = 0; c < cols; ++c) bank.mean[c] = in.f64();
  bank.energies.resize(rows);
  for (std::uint32_t r = 0; r < rows; ++r) bank.energies[r] = in.f64();
  const std::uint32_t ac = in.u32();
  if (static_cast<std::uint64_t>(ac) * 8 > in.remaining()) {
    throw Error(ErrorCode::kTruncatedRecord, "AC energy list truncated at offset " + std::to_string(in.offset()));
  }
  bank.ac_energies.resize(ac);
  for (std::uint32_t r = 0; r < ac; ++r) bank.ac_energies[r] = in.f64();
  bank.bias = in.f64();
  return bank;
}

}  // namespace

void write_hop_model(io::ByteWriter& out, const HopModel& model) {
  const auto& c = model.config;
  out.magic("PFHM");
  out.u32(kHopModelVersion);
  out.u32(static_cast<std::uint32_t>(c.hop1_kernels));
  out.u32(static_cast<std::uint32_t>(c.hop2_kernels));
  out.u32(static_cast<std::uint32_t>(c.hop1_neighbors));
  out.u32(static_cast<std::uint32_t>(c.hop2_neighbors));
  out.f64(c.energy_threshold);
  out.u8(static_cast<std::uint8_t>(c.attributes));
  out.u32(static_cast<std::uint32_t>(c.shape_neighbors));
  out.u32(static_cast<std::uint32_t>(c.samples_per_cloud));
  out.u64(c.seed);
  write_bank(out, model.hop1);
  out.u32(static_cast<std::uint32_t>(model.hop2.size()));
  for (std::size_t b = 0; b < model.hop2.size(); ++b) {
    out.u32(static_cast<std::uint32_t>(model.retained_channels[b]));
    write_bank(out, model.hop2[b]);
  }
}

HopModel read_hop_model(io::ByteReader& in) {
  in.expect_magic("PFHM");
  const std::uint32_t version = in.u32();
  if (version != kHopModelVersion) {
    throw Error(ErrorCode::kMalformedFile, "unsupported hop model version " + std::to_string(version));
  }
  HopModel model;
  auto& c = model.config;
  c.hop1_kernels = in.u32();
  c.hop2_kernels = in.u32();
  c.hop1_neighbors = in.u32();
  c.hop2_neighbors = in.u32();
  c.energy_threshold = in.f64();
  const std::size_t attr_offset = in.offset();
  const std::uint8_t attrs = in.u8();
  if (attrs > 1) {
    throw Error(ErrorCode::kMalformedFile,
                "unknown descriptor attribute set at byte offset " + std::to_string(attr_offset));
  }
  c.attributes = static_cast<DescriptorAttributes>(attrs);
  c.shape_neighbors = in.u32();
  c.samples_per_cloud = in.u32();
  c.seed = in.u64();
  model.hop1 = read_bank(in);
  if (model.hop1.input_dim() != static_cast<Eigen::Index>(8 * c.attribute_width())) {
    throw Error(ErrorCode::kMalformedFile, "hop-1 input width does not match the attribute set");
  }
  const std::uint32_t banks = in.u32();
  for (std::uint32_t b = 0; b < banks; ++b) {
    const std::uint32_t channel = in.u32();
    if (channel >= static_cast<std::uint32_t>(model.hop1.num_kernels())) {
      throw Error(ErrorCode::kMalformedFile, "hop-2 bank references unknown channel");
    }
    model.retained_channels.push_back(channel);
    model.hop2.push_back(read_bank(in));
  }
  return model;
}

void save_hop_model(const std::filesystem::path& path, const HopModel& model) {
  io::ByteWriter out;
  write_hop_model(out, model);
  io::write_file(path, out.bytes());
}

HopModel load_hop_model(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  io::ByteReader in(bytes);
  return read_hop_model(in);
}

}  // namespace pointflow::features
