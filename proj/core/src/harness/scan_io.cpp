#include "pointflow/harness/scan_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <string>

#include "pointflow/core/binary_io.hpp"
#include "pointflow/core/error.hpp"

namespace pointflow::harness {

namespace {

[[noreturn]] void malformed(std::size_t offset, const std::string& what) {
  throw Error(ErrorCode::kMalformedFile, what + " at byte " + std::to_string(offset));
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f'; }

// Whitespace-separated tokens of one line, with their byte offsets.
struct Token {
  std::string_view text;
  std::size_t offset;
};

std::vector<Token> tokenize(std::string_view line, std::size_t base) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) out.push_back({line.substr(start, i - start), base + start});
  }
  return out;
}

double parse_double(const Token& t) {
  double v = 0.0;
  const char* first = t.text.data();
  const char* last = first + t.text.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) malformed(t.offset, "bad number '" + std::string(t.text) + "'");
  return v;
}

void append_point(std::vector<Point3>& out, const Point3& p, std::size_t offset) {
  if (!p.allFinite()) malformed(offset, "non-finite coordinate");
  out.push_back(p);
}

// Line iterator over a byte buffer that remembers where each line starts.
class Lines {
 public:
  explicit Lines(std::string_view text) : text_(text) {}

  bool next(std::string_view& line, std::size_t& offset) {
    if (pos_ >= text_.size()) return false;
    offset = pos_;
    const std::size_t end = text_.find('\n', pos_);
    if (end == std::string_view::npos) {
      line = text_.substr(pos_);
      pos_ = text_.size();
    } else {
      line = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
    }
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return true;
  }
  std::size_t position() const { return pos_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

PointCloud parse_kitti(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kRecord = 16;
  if (bytes.size() % kRecord != 0) {
    throw Error(ErrorCode::kTruncatedRecord, "kitti_bin record truncated at byte " +
                                                 std::to_string(bytes.size() - bytes.size() % kRecord));
  }
  io::ByteReader in(bytes);
  std::vector<Point3> pts;
  pts.reserve(bytes.size() / kRecord);
  while (!in.at_end()) {
    const std::size_t at = in.offset();
    const double x = in.f32();
    const double y = in.f32();
    const double z = in.f32();
    in.f32();
    append_point(pts, {x, y, z}, at);
  }
  return PointCloud(std::move(pts));
}

PointCloud parse_xyz(std::span<const std::uint8_t> bytes) {
  Lines lines({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
  std::vector<Point3> pts;
  std::string_view line;
  std::size_t offset = 0;
  while (lines.next(line, offset)) {
    const auto tokens = tokenize(line, offset);
    if (tokens.empty() || tokens.front().text.front() == '#') continue;
    if (tokens.size() < 3) {
      throw Error(ErrorCode::kTruncatedRecord, "xyz line with " + std::to_string(tokens.size()) +
                                                   " values at byte " + std::to_string(offset));
    }
    if (tokens.size() > 3) malformed(tokens[3].offset, "xyz line with more than 3 values");
    append_point(pts, {parse_double(tokens[0]), parse_double(tokens[1]), parse_double(tokens[2])}, offset);
  }
  return PointCloud(std::move(pts));
}

struct PlyProperty {
  std::string name;
  std::size_t size = 0;  // bytes in binary form
  char kind = 'f';       // 'f' float, 'd' double, 'i' signed, 'u' unsigned
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
  bool has_list = false;
};

std::optional<PlyProperty> ply_type(std::string_view t) {
  static const std::array<std::pair<std::string_view, PlyProperty>, 16> kTypes{{
      {"char", {"", 1, 'i'}},   {"int8", {"", 1, 'i'}},    {"uchar", {"", 1, 'u'}},  {"uint8", {"", 1, 'u'}},
      {"short", {"", 2, 'i'}},  {"int16", {"", 2, 'i'}},   {"ushort", {"", 2, 'u'}}, {"uint16", {"", 2, 'u'}},
      {"int", {"", 4, 'i'}},    {"int32", {"", 4, 'i'}},   {"uint", {"", 4, 'u'}},   {"uint32", {"", 4, 'u'}},
      {"float", {"", 4, 'f'}},  {"float32", {"", 4, 'f'}}, {"double", {"", 8, 'd'}}, {"float64", {"", 8, 'd'}},
  }};
  for (const auto& [name, prop] : kTypes) {
    if (name == t) return prop;
  }
  return std::nullopt;
}

PointCloud parse_ply(std::span<const std::uint8_t> bytes) {
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  Lines lines(text);
  std::string_view line;
  std::size_t offset = 0;
  if (!lines.next(line, offset) || line != "ply") malformed(0, "missing ply magic");

  std::optional<PlyEncoding> encoding;
  std::vector<PlyElement> elements;
  bool ended = false;
  while (lines.next(line, offset)) {
    const auto tok = tokenize(line, offset);
    if (tok.empty()) continue;
    const auto key = tok[0].text;
    if (key == "end_header") {
      ended = true;
      break;
    }
    if (key == "comment" || key == "obj_info") continue;
    if (key == "format") {
      if (tok.size() != 3) malformed(offset, "bad format line");
      if (tok[1].text == "ascii") {
        encoding = PlyEncoding::kAscii;
      } else if (tok[1].text == "binary_little_endian") {
        encoding = PlyEncoding::kBinaryLittleEndian;
      } else {
        malformed(tok[1].offset, "unsupported ply format '" + std::string(tok[1].text) + "'");
      }
    } else if (key == "element") {
      if (tok.size() != 3) malformed(offset, "bad element line");
      PlyElement e;
      e.name = tok[1].text;
      const auto [ptr, ec] = std::from_chars(tok[2].text.data(), tok[2].text.data() + tok[2].text.size(), e.count);
      if (ec != std::errc{} || ptr != tok[2].text.data() + tok[2].text.size()) malformed(tok[2].offset, "bad element count");
      elements.push_back(std::move(e));
    } else if (key == "property") {
      if (elements.empty()) malformed(offset, "property before any element");
      if (tok.size() >= 2 && tok[1].text == "list") {
        elements.back().has_list = true;
        elements.back().properties.push_back({std::string(tok.back().text), 0, 'l'});
        continue;
      }
      if (tok.size() != 3) malformed(offset, "bad property line");
      auto p = ply_type(tok[1].text);
      if (!p) malformed(tok[1].offset, "unknown property type '" + std::string(tok[1].text) + "'");
      p->name = tok[2].text;
      elements.back().properties.push_back(*p);
    } else {
      malformed(tok[0].offset, "unknown header keyword '" + std::string(key) + "'");
    }
  }
  if (!ended) malformed(bytes.size(), "missing end_header");
  if (!encoding) malformed(0, "missing format line");

  // The vertex element must come first unless earlier elements are fixed-size
  // (binary) or line-based (ascii) and can be skipped.
  const auto vertex = std::find_if(elements.begin(), elements.end(), [](const auto& e) { return e.name == "vertex"; });
  if (vertex == elements.end()) malformed(0, "no vertex element");
  if (vertex->has_list) malformed(0, "list property in vertex element");
  std::array<int, 3> axis{-1, -1, -1};
  for (std::size_t i = 0; i < vertex->properties.size(); ++i) {
    const auto& p = vertex->properties[i];
    for (int a = 0; a < 3; ++a) {
      if (p.name == std::string(1, static_cast<char>('x' + a))) {
        if (p.kind != 'f' && p.kind != 'd') malformed(0, "coordinate property '" + p.name + "' is not float");
        axis[static_cast<std::size_t>(a)] = static_cast<int>(i);
      }
    }
  }
  if (std::find(axis.begin(), axis.end(), -1) != axis.end()) malformed(0, "vertex element lacks x/y/z");

  std::vector<Point3> pts;
  pts.reserve(vertex->count);
  const std::size_t body = lines.position();
  if (*encoding == PlyEncoding::kAscii) {
    std::size_t skip = 0;
    for (auto e = elements.begin(); e != vertex; ++e) skip += e->count;
    for (std::size_t i = 0; i < skip; ++i) {
      if (!lines.next(line, offset)) throw Error(ErrorCode::kTruncatedRecord, "ply body ends early at byte " + std::to_string(bytes.size()));
    }
    while (pts.size() < vertex->count) {
      if (!lines.next(line, offset)) {
        throw Error(ErrorCode::kTruncatedRecord, "ply has " + std::to_string(pts.size()) + " of " +
                                                     std::to_string(vertex->count) + " vertices at byte " +
                                                     std::to_string(bytes.size()));
      }
      const auto tok = tokenize(line, offset);
      if (tok.empty()) continue;
      if (tok.size() < vertex->properties.size()) {
        throw Error(ErrorCode::kTruncatedRecord, "ply vertex line short at byte " + std::to_string(offset));
      }
      if (tok.size() > vertex->properties.size()) malformed(offset, "ply vertex line has extra values");
      Point3 p;
      for (int a = 0; a < 3; ++a) p[a] = parse_double(tok[static_cast<std::size_t>(axis[static_cast<std::size_t>(a)])]);
      append_point(pts, p, offset);
    }
    return PointCloud(std::move(pts));
  }

  io::ByteReader in(bytes.subspan(body));
  auto skip_bytes = [&](std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) in.u8();
  };
  try {
    for (auto e = elements.begin(); e != vertex; ++e) {
      if (e->has_list) malformed(body, "list element before vertex in binary ply");
      std::size_t stride = 0;
      for (const auto& p : e->properties) stride += p.size;
      skip_bytes(stride * e->count);
    }
    for (std::size_t v = 0; v < vertex->count; ++v) {
      const std::size_t at = body + in.offset();
      Point3 p = Point3::Zero();
      for (std::size_t i = 0; i < vertex->properties.size(); ++i) {
        const auto& prop = vertex->properties[i];
        const auto hit = std::find(axis.begin(), axis.end(), static_cast<int>(i));
        if (hit == axis.end()) {
          skip_bytes(prop.size);
          continue;
        }
        p[hit - axis.begin()] = prop.kind == 'd' ? in.f64() : static_cast<double>(in.f32());
      }
      append_point(pts, p, at);
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kTruncatedRecord) throw;
    throw Error(ErrorCode::kTruncatedRecord, "ply body ends early after byte " + std::to_string(body + in.offset()));
  }
  return PointCloud(std::move(pts));
}

void append_text(std::vector<std::uint8_t>& out, std::string_view s) { out.insert(out.end(), s.begin(), s.end()); }

void append_number(std::vector<std::uint8_t>& out, double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  append_text(out, std::string_view(buf.data(), static_cast<std::size_t>(ptr - buf.data())));
}

void append_xyz_lines(std::vector<std::uint8_t>& out, const PointCloud& cloud) {
  for (const auto& p : cloud) {
    append_number(out, p.x());
    out.push_back(' ');
    append_number(out, p.y());
    out.push_back(' ');
    append_number(out, p.z());
    out.push_back('\n');
  }
}

}  // namespace

std::optional<ScanFormat> parse_scan_format(std::string_view name) {
  if (name == "kitti_bin" || name == "bin") return ScanFormat::kKittiBin;
  if (name == "ply") return ScanFormat::kPly;
  if (name == "xyz_text" || name == "xyz" || name == "txt") return ScanFormat::kXyzText;
  return std::nullopt;
}

ScanFormat scan_format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  if (!ext.empty()) ext.erase(0, 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (const auto f = parse_scan_format(ext)) return *f;
  throw Error(ErrorCode::kInvalidArgument, "cannot infer scan format from '" + path.string() + "'");
}

PointCloud parse_scan(std::span<const std::uint8_t> bytes, ScanFormat format) {
  switch (format) {
    case ScanFormat::kKittiBin:
      return parse_kitti(bytes);
    case ScanFormat::kPly:
      return parse_ply(bytes);
    case ScanFormat::kXyzText:
      return parse_xyz(bytes);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown scan format");
}

PointCloud load_scan(const std::filesystem::path& path, ScanFormat format) {
  const auto bytes = io::read_file(path);
  return parse_scan(bytes, format);
}

PointCloud load_scan(const std::filesystem::path& path) { return load_scan(path, scan_format_from_path(path)); }

std::vector<std::uint8_t> encode_scan(const PointCloud& cloud, ScanFormat format, PlyEncoding ply) {
  if (format == ScanFormat::kKittiBin) {
    io::ByteWriter out;
    for (const auto& p : cloud) {
      out.f32(static_cast<float>(p.x()));
      out.f32(static_cast<float>(p.y()));
      out.f32(static_cast<float>(p.z()));
      out.f32(0.0F);
    }
    return out.bytes();
  }
  std::vector<std::uint8_t> out;
  if (format == ScanFormat::kXyzText) {
    append_xyz_lines(out, cloud);
    return out;
  }
  append_text(out, "ply\nformat ");
  append_text(out, ply == PlyEncoding::kAscii ? "ascii" : "binary_little_endian");
  append_text(out, " 1.0\nelement vertex " + std::to_string(cloud.size()) + "\n");
  append_text(out, "property double x\nproperty double y\nproperty double z\nend_header\n");
  if (ply == PlyEncoding::kAscii) {
    append_xyz_lines(out, cloud);
    return out;
  }
  io::ByteWriter body;
  for (const auto& p : cloud) {
    body.f64(p.x());
    body.f64(p.y());
    body.f64(p.z());
  }
  out.insert(out.end(), body.bytes().begin(), body.bytes().end());
  return out;
}

void save_scan(const std::filesystem::path& path, const PointCloud& cloud, ScanFormat format, PlyEncoding ply) {
  io::write_file(path, encode_scan(cloud, format, ply));
}

}  // namespace pointflow::harness
