#include "pointflow/core/binary_io.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "pointflow/core/error.hpp"

namespace pointflow::io {

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::magic(std::string_view tag) {
  for (char c : tag) bytes_.push_back(static_cast<std::uint8_t>(c));
}

void ByteReader::require(std::size_t n) const {
  if (bytes_.size() - offset_ < n) {
    throw Error(ErrorCode::kTruncatedRecord,
                "need " + std::to_string(n) + " bytes at offset " + std::to_string(offset_) +
                    ", only " + std::to_string(bytes_.size() - offset_) + " left");
  }
}

std::uint8_t ByteReader::u8() {
  require(1);
  return bytes_[offset_++];
}

std::uint32_t ByteReader::u32() {
  require(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[offset_ + i]) << (8 * i);
  offset_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  require(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[offset_ + i]) << (8 * i);
  offset_ += 8;
  return v;
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }
double ByteReader::f64() { return std::bit_cast<double>(u64()); }

void ByteReader::expect_magic(std::string_view tag) {
  const std::size_t at = offset_;
  require(tag.size());
  for (char c : tag) {
    if (bytes_[offset_++] != static_cast<std::uint8_t>(c)) {
      throw Error(ErrorCode::kMalformedFile,
                  "bad magic at byte offset " + std::to_string(at) + ", expected '" +
                      std::string(tag) + "'");
    }
  }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

}  // namespace pointflow::io
