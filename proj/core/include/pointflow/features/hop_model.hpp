#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pointflow/core/binary_io.hpp"
#include "pointflow/core/kd_index.hpp"
#include "pointflow/core/types.hpp"
#include "pointflow/features/saab.hpp"

namespace pointflow::features {

/// Per-neighbor attributes used by the hop-1 octant descriptor.
enum class DescriptorAttributes : std::uint8_t {
  /// Relative coordinates only: A = 3, descriptor width 24.
  kRelativeCoordinates = 0,
  /// Relative coordinates plus 8 eigenvalue-derived shape scalars of the
  /// neighbor (linearity, planarity, sphericity, omnivariance, anisotropy,
  /// eigen sum, eigen entropy, surface variation): A = 11, width 88.
  kRelativeAndShape = 1,
};

struct HopModelConfig {
  std::size_t hop1_kernels = 13;
  std::size_t hop2_kernels = 8;
  std::size_t hop1_neighbors = 32;
  std::size_t hop2_neighbors = 16;
  /// A hop-1 channel gets a hop-2 bank when its energy is at least this
  /// fraction of the total hop-1 energy. 0 retains every channel.
  double energy_threshold = 0.0;
  DescriptorAttributes attributes = DescriptorAttributes::kRelativeCoordinates;
  std::size_t shape_neighbors = 16;
  std::size_t samples_per_cloud = 2048;
  std::uint64_t seed = 7;

  std::size_t attribute_width() const {
    return attributes == DescriptorAttributes::kRelativeCoordinates ? 3 : 11;
  }
};

/// Two-hop channel-wise Saab model without downsampling.
struct HopModel {
  HopModelConfig config;
  SaabKernelBank hop1;
  std::vector<std::size_t> retained_channels;  // hop-1 channels with a hop-2 bank
  std::vector<SaabKernelBank> hop2;            // parallel to retained_channels

  std::size_t feature_width() const;
  /// Σ num_kernels * input_dim over every bank.
  std::size_t kernel_weight_count() const;
  std::size_t hop1_weight_count() const;
  std::size_t hop2_weight_count() const;
};

/// Label-free single-pass fit. Throws InsufficientSamples when the training
/// clouds hold fewer than two usable points.
HopModel hopmodel_fit(std::span<const PointCloud> training_clouds, const HopModelConfig& config = {});

/// Per-point features (one row per point): hop-1 responses then the hop-2
/// responses of every retained channel. Translation-invariant and
/// permutation-equivariant.
RowMatrix extract_features(const HopModel& model, const PointCloud& cloud);
RowMatrix extract_features(const HopModel& model, const PointCloud& cloud, const KdIndex& index);

/// Per-point extra attribute table for the configured descriptor (n x 0 or n x 8).
RowMatrix descriptor_attributes(const PointCloud& cloud, const KdIndex& index,
                                const HopModelConfig& config);

/// Hop-1 input descriptors for the given points (one row each).
RowMatrix hop1_descriptors(const PointCloud& cloud, const KdIndex& index,
                           const Eigen::Ref<const RowMatrix>& attributes,
                           std::span<const std::size_t> points, std::size_t k);

void write_hop_model(io::ByteWriter& out, const HopModel& model);
HopModel read_hop_model(io::ByteReader& in);
void save_hop_model(const std::filesystem::path& path, const HopModel& model);
HopModel load_hop_model(const std::filesystem::path& path);

}  // namespace pointflow::features
