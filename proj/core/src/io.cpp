#include "pcreg/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace pcreg {
namespace {

using Kind = FormatErrorKind;

std::uint32_t load_u32(const std::byte* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}

float load_f32(const std::byte* p) { return std::bit_cast<float>(load_u32(p)); }

void store_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void store_f32(std::string& out, float v) { store_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::span<const std::byte> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::byte*>(s.data()), s.size()};
}

/// Splits on '\n', dropping a trailing '\r'. Yields (1-based line, text).
class Lines {
public:
  explicit Lines(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    const std::size_t end = std::min(text_.find('\n', pos_), text_.size());
    line = text_.substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end + 1;
    ++number_;
    return true;
  }
  std::size_t number() const { return number_; }

private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t number_ = 0;
};

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = s.find(sep, start);
    out.push_back(s.substr(start, end == std::string_view::npos ? s.npos : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

bool blank(std::string_view s) { return tokens(s).empty(); }

double parse_real(std::string_view tok, const std::string& source, std::size_t line) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec == std::errc::result_out_of_range) {
    throw FormatError(Kind::non_finite, source, line, "value out of range: '" + std::string(tok) + "'");
  }
  if (ec != std::errc() || ptr != last || first == last) {
    throw FormatError(Kind::syntax, source, line, "not a number: '" + std::string(tok) + "'");
  }
  if (!std::isfinite(v)) {
    throw FormatError(Kind::non_finite, source, line, "non-finite value '" + std::string(tok) + "'");
  }
  return v;
}

std::size_t parse_index(std::string_view tok, const std::string& source, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
    throw FormatError(Kind::syntax, source, line,
                      "not a non-negative integer: '" + std::string(tok) + "'");
  }
  return v;
}

RigidMotion motion_from_row(const double* v) {
  Matrix3 r;
  Vector3 t;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r(i, j) = v[4 * i + j];
    t[i] = v[4 * i + 3];
  }
  return {r, t};
}

void append_motion_row(std::string& out, const RigidMotion& m, char sep) {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i + j > 0) out.push_back(sep);
      out += format_real(j < 3 ? m.rotation()(i, j) : m.translation()[i]);
    }
  }
}

}  // namespace

const char* to_string(FormatErrorKind k) {
  switch (k) {
    case Kind::io: return "io";
    case Kind::magic: return "magic";
    case Kind::truncated: return "truncated";
    case Kind::non_finite: return "non_finite";
    case Kind::syntax: return "syntax";
    case Kind::invalid: return "invalid";
  }
  return "unknown";
}

FormatError::FormatError(FormatErrorKind kind, std::string source, std::size_t line,
                         const std::string& what)
    : std::runtime_error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " +
                         what),
      kind_(kind),
      source_(std::move(source)),
      line_(line) {}

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path) {
  const std::string s = read_file_text(path);
  const auto b = as_bytes(s);
  return {b.begin(), b.end()};
}

std::string read_file_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(Kind::io, path.string(), 0, "cannot open file");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw FormatError(Kind::io, path.string(), 0, "read failed");
  return data;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(Kind::io, path.string(), 0, "cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw FormatError(Kind::io, path.string(), 0, "write failed");
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw FormatError(Kind::io, path.string(), 0, "rename failed: " + ec.message());
}

// ---------------------------------------------------------------------------
// PLY

PointCloud parse_ply(std::string_view text, const std::string& source) {
  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> props;
    std::vector<bool> is_float;  // float32 (vs. wider) property
    bool has_list = false;
  };
  std::vector<Element> elements;
  Lines lines(text);
  std::string_view line;

  if (!lines.next(line) || line != "ply") {
    throw FormatError(Kind::magic, source, 1, "missing 'ply' signature");
  }
  bool format_seen = false, header_done = false;
  while (lines.next(line)) {
    const auto t = tokens(line);
    if (t.empty()) continue;
    if (t[0] == "end_header") {
      header_done = true;
      break;
    }
    if (t[0] == "comment" || t[0] == "obj_info") continue;
    if (t[0] == "format") {
      if (t.size() != 3 || t[1] != "ascii") {
        throw FormatError(Kind::magic, source, lines.number(), "only ASCII PLY is supported");
      }
      format_seen = true;
    } else if (t[0] == "element") {
      if (t.size() != 3) throw FormatError(Kind::syntax, source, lines.number(), "bad element line");
      elements.push_back({std::string(t[1]), parse_index(t[2], source, lines.number()), {}, {}, false});
    } else if (t[0] == "property") {
      if (elements.empty()) {
        throw FormatError(Kind::syntax, source, lines.number(), "property before element");
      }
      if (t.size() >= 2 && t[1] == "list") {
        elements.back().has_list = true;
        elements.back().props.emplace_back(t.back());
        elements.back().is_float.push_back(false);
        continue;
      }
      if (t.size() != 3) throw FormatError(Kind::syntax, source, lines.number(), "bad property line");
      elements.back().props.emplace_back(t[2]);
      elements.back().is_float.push_back(t[1] == "float" || t[1] == "float32");
    } else {
      throw FormatError(Kind::syntax, source, lines.number(),
                        "unknown header keyword '" + std::string(t[0]) + "'");
    }
  }
  if (!header_done) throw FormatError(Kind::truncated, source, lines.number(), "no end_header");
  if (!format_seen) throw FormatError(Kind::magic, source, 0, "missing format line");

  PointCloud cloud;
  bool vertex_seen = false;
  for (const Element& e : elements) {
    const bool is_vertex = e.name == "vertex";
    int ix = -1, iy = -1, iz = -1;
    if (is_vertex) {
      if (e.has_list) throw FormatError(Kind::invalid, source, 0, "list property in vertex element");
      for (std::size_t k = 0; k < e.props.size(); ++k) {
        if (e.props[k] == "x") ix = int(k);
        if (e.props[k] == "y") iy = int(k);
        if (e.props[k] == "z") iz = int(k);
      }
      if (ix < 0 || iy < 0 || iz < 0) {
        throw FormatError(Kind::invalid, source, 0, "vertex element lacks x, y or z");
      }
      vertex_seen = true;
      cloud.points.reserve(std::min<std::size_t>(e.count, text.size() / 2));
    }
    for (std::size_t i = 0; i < e.count; ++i) {
      do {
        if (!lines.next(line)) {
          throw FormatError(Kind::truncated, source, lines.number(),
                            "expected " + std::to_string(e.count) + " " + e.name + " rows, got " +
                                std::to_string(i));
        }
      } while (blank(line));
      if (!is_vertex) continue;
      const auto t = tokens(line);
      if (t.size() != e.props.size()) {
        throw FormatError(Kind::syntax, source, lines.number(),
                          "expected " + std::to_string(e.props.size()) + " values");
      }
      auto coord = [&](int k) {
        const double v = parse_real(t[std::size_t(k)], source, lines.number());
        if (!e.is_float[std::size_t(k)]) return v;
        const float f = static_cast<float>(v);
        if (!std::isfinite(f)) {
          throw FormatError(Kind::non_finite, source, lines.number(), "value overflows float32");
        }
        return double(f);
      };
      cloud.points.emplace_back(coord(ix), coord(iy), coord(iz));
    }
  }
  if (!vertex_seen) throw FormatError(Kind::invalid, source, 0, "no vertex element");
  while (lines.next(line)) {
    if (!blank(line)) throw FormatError(Kind::syntax, source, lines.number(), "trailing data");
  }
  return cloud;
}

std::string format_ply(const PointCloud& cloud) {
  std::string out = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(cloud.size()) +
                    "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  char buf[48];
  for (const Point3& p : cloud.points) {
    for (int a = 0; a < 3; ++a) {
      const auto res = std::to_chars(buf, buf + sizeof buf, static_cast<float>(p[a]));
      out.append(buf, res.ptr);
      out.push_back(a < 2 ? ' ' : '\n');
    }
  }
  return out;
}

PointCloud read_ply(const std::filesystem::path& path) {
  return parse_ply(read_file_text(path), path.string());
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
  write_file(path, format_ply(cloud));
}

// ---------------------------------------------------------------------------
// KITTI-style raw clouds

PointCloud parse_kitti_bin(std::span<const std::byte> bytes, const std::string& source) {
  if (bytes.size() % 16 != 0) {
    throw FormatError(Kind::truncated, source, 0,
                      "length " + std::to_string(bytes.size()) + " is not a multiple of 16");
  }
  PointCloud cloud;
  cloud.points.reserve(bytes.size() / 16);
  for (std::size_t off = 0; off < bytes.size(); off += 16) {
    const float x = load_f32(&bytes[off]), y = load_f32(&bytes[off + 4]),
                z = load_f32(&bytes[off + 8]);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
      throw FormatError(Kind::non_finite, source, 0,
                        "non-finite coordinate in point " + std::to_string(off / 16));
    }
    cloud.points.emplace_back(x, y, z);
  }
  return cloud;
}

std::string format_kitti_bin(const PointCloud& cloud) {
  std::string out;
  out.reserve(cloud.size() * 16);
  for (const Point3& p : cloud.points) {
    store_f32(out, static_cast<float>(p.x()));
    store_f32(out, static_cast<float>(p.y()));
    store_f32(out, static_cast<float>(p.z()));
    store_f32(out, 0.0f);
  }
  return out;
}

PointCloud read_kitti_bin(const std::filesystem::path& path) {
  const std::string data = read_file_text(path);
  return parse_kitti_bin(as_bytes(data), path.string());
}

void write_kitti_bin(const std::filesystem::path& path, const PointCloud& cloud) {
  write_file(path, format_kitti_bin(cloud));
}

PointCloud read_cloud(const std::filesystem::path& path) {
  const auto ext = path.extension();
  if (ext == ".ply") return read_ply(path);
  if (ext == ".bin") return read_kitti_bin(path);
  throw FormatError(Kind::invalid, path.string(), 0, "unknown cloud extension (want .ply or .bin)");
}

// ---------------------------------------------------------------------------
// Descriptors

DescriptorSet parse_descriptors(std::span<const std::byte> bytes, const std::string& source) {
  static constexpr char kMagic[4] = {'F', 'D', 'S', 'C'};
  const std::size_t head = std::min<std::size_t>(4, bytes.size());
  if (std::memcmp(bytes.data(), kMagic, head) != 0) {
    throw FormatError(Kind::magic, source, 0, "bad signature (want FDSC)");
  }
  if (bytes.size() < 12) throw FormatError(Kind::truncated, source, 0, "header shorter than 12 bytes");
  const std::uint64_t count = load_u32(&bytes[4]);
  const std::uint64_t dim = load_u32(&bytes[8]);
  if (count == 0 || dim == 0) throw FormatError(Kind::invalid, source, 0, "count and dim must be >= 1");

  const std::uint64_t payload = bytes.size() - 12;
  const std::uint64_t floats = payload / 4;
  if (dim > floats / count || count * dim * 4 > payload) {
    throw FormatError(Kind::truncated, source, 0,
                      "header promises " + std::to_string(count) + "x" + std::to_string(dim) +
                          " floats, file holds " + std::to_string(floats));
  }
  if (count * dim * 4 != payload) {
    throw FormatError(Kind::invalid, source, 0, "trailing bytes after descriptor payload");
  }

  DescriptorSet::Matrix rows(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
  float* dst = rows.data();
  for (std::uint64_t k = 0; k < count * dim; ++k) {
    const float v = load_f32(&bytes[12 + 4 * k]);
    if (!std::isfinite(v)) {
      throw FormatError(Kind::non_finite, source, 0,
                        "non-finite value in row " + std::to_string(k / dim));
    }
    dst[k] = v;
  }
  return DescriptorSet(std::move(rows));
}

std::string format_descriptors(const DescriptorSet& set) {
  std::string out = "FDSC";
  store_u32(out, static_cast<std::uint32_t>(set.count()));
  store_u32(out, static_cast<std::uint32_t>(set.dim()));
  const float* p = set.matrix().data();
  for (std::size_t k = 0; k < set.count() * set.dim(); ++k) store_f32(out, p[k]);
  return out;
}

DescriptorSet read_descriptors(const std::filesystem::path& path) {
  const std::string data = read_file_text(path);
  return parse_descriptors(as_bytes(data), path.string());
}

void write_descriptors(const std::filesystem::path& path, const DescriptorSet& set) {
  write_file(path, format_descriptors(set));
}

// ---------------------------------------------------------------------------
// Poses and timestamps

std::vector<RigidMotion> parse_poses(std::string_view text, const std::string& source) {
  std::vector<RigidMotion> out;
  Lines lines(text);
  std::string_view line;
  while (lines.next(line)) {
    const auto t = tokens(line);
    if (t.empty()) continue;
    if (t.size() != 12) {
      throw FormatError(Kind::syntax, source, lines.number(),
                        "expected 12 numbers, got " + std::to_string(t.size()));
    }
    double v[12];
    for (int k = 0; k < 12; ++k) v[k] = parse_real(t[std::size_t(k)], source, lines.number());
    RigidMotion m = motion_from_row(v);
    // Loose enough for poses printed with a few significant digits.
    if (!m.is_valid(1e-4)) {
      throw FormatError(Kind::invalid, source, lines.number(), "rotation block is not a rotation");
    }
    out.push_back(m);
  }
  return out;
}

std::string format_poses(std::span<const RigidMotion> poses) {
  std::string out;
  for (const auto& p : poses) {
    append_motion_row(out, p, ' ');
    out.push_back('\n');
  }
  return out;
}

std::vector<RigidMotion> read_poses(const std::filesystem::path& path) {
  return parse_poses(read_file_text(path), path.string());
}

std::vector<double> parse_times(std::string_view text, const std::string& source) {
  std::vector<double> out;
  Lines lines(text);
  std::string_view line;
  while (lines.next(line)) {
    const auto t = tokens(line);
    if (t.empty()) continue;
    if (t.size() != 1) throw FormatError(Kind::syntax, source, lines.number(), "expected one number");
    out.push_back(parse_real(t[0], source, lines.number()));
  }
  return out;
}

std::vector<double> read_times(const std::filesystem::path& path) {
  return parse_times(read_file_text(path), path.string());
}

// ---------------------------------------------------------------------------
// Pair lists

std::vector<PairRecord> parse_pair_list(std::string_view text, const std::string& source) {
  Lines lines(text);
  std::string_view line;
  if (!lines.next(line) || line != kPairListHeader) {
    throw FormatError(Kind::magic, source, 1, "missing pair-list header");
  }
  std::vector<PairRecord> out;
  while (lines.next(line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    const std::size_t ln = lines.number();
    if (f.size() != 17) {
      throw FormatError(Kind::syntax, source, ln, "expected 17 fields, got " + std::to_string(f.size()));
    }
    PairRecord r;
    if (f[0].empty()) throw FormatError(Kind::syntax, source, ln, "empty sequence_id");
    r.sequence_id = std::string(f[0]);
    r.src = parse_index(f[1], source, ln);
    r.tgt = parse_index(f[2], source, ln);
    double v[12];
    for (int k = 0; k < 12; ++k) v[k] = parse_real(f[3 + std::size_t(k)], source, ln);
    r.gt = motion_from_row(v);
    if (!r.gt.is_valid(1e-6)) throw FormatError(Kind::invalid, source, ln, "rotation block is not a rotation");
    r.overlap = parse_real(f[15], source, ln);
    r.dt = parse_real(f[16], source, ln);
    if (!(r.overlap >= 0.0 && r.overlap <= 1.0)) {
      throw FormatError(Kind::invalid, source, ln, "overlap outside [0, 1]");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_pair_list(std::span<const PairRecord> pairs) {
  std::string out(kPairListHeader);
  out.push_back('\n');
  for (const auto& p : pairs) {
    if (p.sequence_id.empty() || p.sequence_id.find_first_of(",\n\r") != std::string::npos) {
      throw std::invalid_argument("pair list: sequence_id '" + p.sequence_id +
                                  "' is empty or contains a separator");
    }
    out += p.sequence_id;
    out += ',' + std::to_string(p.src) + ',' + std::to_string(p.tgt) + ',';
    append_motion_row(out, p.gt, ',');
    out += ',' + format_real(p.overlap) + ',' + format_real(p.dt) + '\n';
  }
  return out;
}

std::vector<PairRecord> read_pair_list(const std::filesystem::path& path) {
  return parse_pair_list(read_file_text(path), path.string());
}

void write_pair_list(const std::filesystem::path& path, std::span<const PairRecord> pairs) {
  write_file(path, format_pair_list(pairs));
}

}  // namespace pcreg
