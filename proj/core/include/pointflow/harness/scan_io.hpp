#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pointflow/core/types.hpp"

namespace pointflow::harness {

enum class ScanFormat { kKittiBin, kPly, kXyzText };
enum class PlyEncoding { kAscii, kBinaryLittleEndian };

std::optional<ScanFormat> parse_scan_format(std::string_view name);
/// From the extension: .bin, .ply, .xyz / .txt. Throws InvalidArgument otherwise.
ScanFormat scan_format_from_path(const std::filesystem::path& path);

/// kitti_bin: little-endian f32 quadruples (x, y, z, intensity), intensity dropped.
/// ply: ascii or binary_little_endian, vertex x/y/z as float or double.
/// xyz_text: one whitespace-separated triple per line, '#' starts a comment.
/// Errors: MalformedFile or TruncatedRecord, both naming the byte offset.
PointCloud parse_scan(std::span<const std::uint8_t> bytes, ScanFormat format);
PointCloud load_scan(const std::filesystem::path& path, ScanFormat format);
PointCloud load_scan(const std::filesystem::path& path);

/// kitti_bin rounds to f32 and writes zero intensity. ply stores doubles, and
/// the text formats use shortest round-trip decimal, so both are lossless.
std::vector<std::uint8_t> encode_scan(const PointCloud& cloud, ScanFormat format,
                                      PlyEncoding ply = PlyEncoding::kBinaryLittleEndian);
void save_scan(const std::filesystem::path& path, const PointCloud& cloud, ScanFormat format,
               PlyEncoding ply = PlyEncoding::kBinaryLittleEndian);

}  // namespace pointflow::harness
