// Point cloud and mesh file formats: PCD v0.7, PLY, XYZ text and OBJ.
#include "dbtsdf/io.hpp"

#include "byte_io.hpp"
#include "dbtsdf/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dbtsdf::io {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

bool parse_double(const std::string& tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::string where(const fs::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

bool is_time_field(const std::string& name) { return name == "time" || name == "t" || name == "timestamp"; }

void push_point(ScanData& out, const Vec3& p, std::optional<double> t) {
  if (!p.allFinite() || (t && !std::isfinite(*t))) {
    ++out.dropped_nonfinite;
    return;
  }
  out.points.push_back(p);
  if (t) out.times.push_back(*t);
}

// Scalar types shared by PCD (TYPE/SIZE) and PLY (property names).
enum class Scalar { I8, U8, I16, U16, I32, U32, I64, U64, F32, F64 };

std::size_t scalar_size(Scalar s) {
  switch (s) {
    case Scalar::I8: case Scalar::U8: return 1;
    case Scalar::I16: case Scalar::U16: return 2;
    case Scalar::I32: case Scalar::U32: case Scalar::F32: return 4;
    case Scalar::I64: case Scalar::U64: case Scalar::F64: return 8;
  }
  return 0;
}

double read_scalar(const std::uint8_t* p, Scalar s) {
  switch (s) {
    case Scalar::I8: return static_cast<std::int8_t>(p[0]);
    case Scalar::U8: return p[0];
    case Scalar::I16: return static_cast<std::int16_t>(detail::get_le<std::uint16_t>(p));
    case Scalar::U16: return detail::get_le<std::uint16_t>(p);
    case Scalar::I32: return static_cast<std::int32_t>(detail::get_le<std::uint32_t>(p));
    case Scalar::U32: return detail::get_le<std::uint32_t>(p);
    case Scalar::I64: return static_cast<double>(static_cast<std::int64_t>(detail::get_le<std::uint64_t>(p)));
    case Scalar::U64: return static_cast<double>(detail::get_le<std::uint64_t>(p));
    case Scalar::F32: return std::bit_cast<float>(detail::get_le<std::uint32_t>(p));
    case Scalar::F64: return std::bit_cast<double>(detail::get_le<std::uint64_t>(p));
  }
  return 0.0;
}

// ---------------------------------------------------------------- PCD

struct PcdField {
  std::string name;
  Scalar type = Scalar::F32;
  int count = 1;
  std::size_t offset = 0;  // bytes in binary, tokens in ascii
};

Scalar pcd_scalar(char type, int size, const fs::path& path, std::size_t line) {
  if (type == 'F' && size == 4) return Scalar::F32;
  if (type == 'F' && size == 8) return Scalar::F64;
  if (type == 'I' || type == 'U') {
    const bool u = type == 'U';
    switch (size) {
      case 1: return u ? Scalar::U8 : Scalar::I8;
      case 2: return u ? Scalar::U16 : Scalar::I16;
      case 4: return u ? Scalar::U32 : Scalar::I32;
      case 8: return u ? Scalar::U64 : Scalar::I64;
      default: break;
    }
  }
  fail(ErrorKind::Format, where(path, line) + ": unsupported PCD TYPE/SIZE " + type + std::to_string(size));
}

ScanData read_pcd(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::vector<std::string> names;
  std::vector<int> sizes, counts;
  std::vector<char> types;
  std::size_t points = 0;
  bool have_points = false;
  std::string data;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (data.empty()) {
    if (pos >= bytes.size()) fail(ErrorKind::Format, path.string() + ": PCD header has no DATA line");
    std::size_t end = pos;
    while (end < bytes.size() && bytes[end] != '\n') ++end;
    std::string line(bytes.begin() + pos, bytes.begin() + end);
    pos = std::min(end + 1, bytes.size());
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    const std::string key = lower(tok[0]);
    auto ints = [&](std::vector<int>& dst) {
      for (std::size_t i = 1; i < tok.size(); ++i) {
        int v = 0;
        auto [p, ec] = std::from_chars(tok[i].data(), tok[i].data() + tok[i].size(), v);
        if (ec != std::errc() || v <= 0) fail(ErrorKind::Format, where(path, line_no) + ": bad " + tok[0] + " value");
        dst.push_back(v);
      }
    };
    if (key == "fields") {
      names.assign(tok.begin() + 1, tok.end());
    } else if (key == "size") {
      ints(sizes);
    } else if (key == "type") {
      for (std::size_t i = 1; i < tok.size(); ++i) types.push_back(static_cast<char>(std::toupper(tok[i][0])));
    } else if (key == "count") {
      ints(counts);
    } else if (key == "points") {
      if (tok.size() != 2 ||
          std::from_chars(tok[1].data(), tok[1].data() + tok[1].size(), points).ec != std::errc()) {
        fail(ErrorKind::Format, where(path, line_no) + ": bad POINTS line");
      }
      have_points = true;
    } else if (key == "data") {
      if (tok.size() != 2) fail(ErrorKind::Format, where(path, line_no) + ": bad DATA line");
      data = lower(tok[1]);
    } else if (key == "version" || key == "width" || key == "height" || key == "viewpoint") {
      // informational
    } else {
      fail(ErrorKind::Format, where(path, line_no) + ": unknown PCD header key '" + tok[0] + "'");
    }
  }
  if (names.empty()) fail(ErrorKind::Format, path.string() + ": PCD header has no FIELDS");
  if (counts.empty()) counts.assign(names.size(), 1);
  if (sizes.size() != names.size() || types.size() != names.size() || counts.size() != names.size()) {
    fail(ErrorKind::Format, path.string() + ": PCD FIELDS/SIZE/TYPE/COUNT lengths differ");
  }
  if (!have_points) fail(ErrorKind::Format, path.string() + ": PCD header has no POINTS");

  std::vector<PcdField> fields;
  std::size_t byte_offset = 0, token_offset = 0;
  int ix = -1, iy = -1, iz = -1, it = -1;
  for (std::size_t i = 0; i < names.size(); ++i) {
    PcdField f{lower(names[i]), pcd_scalar(types[i], sizes[i], path, line_no), counts[i], 0};
    f.offset = data == "ascii" ? token_offset : byte_offset;
    byte_offset += scalar_size(f.type) * f.count;
    token_offset += f.count;
    const int idx = static_cast<int>(fields.size());
    if (f.name == "x") ix = idx;
    if (f.name == "y") iy = idx;
    if (f.name == "z") iz = idx;
    if (is_time_field(f.name)) it = idx;
    fields.push_back(f);
  }
  if (ix < 0 || iy < 0 || iz < 0) fail(ErrorKind::Format, path.string() + ": PCD lacks x y z fields");

  ScanData out;
  out.points.reserve(std::min(points, bytes.size()));
  if (data == "ascii") {
    std::size_t read = 0;
    std::vector<double> values(token_offset);
    while (pos < bytes.size() && read < points) {
      std::size_t end = pos;
      while (end < bytes.size() && bytes[end] != '\n') ++end;
      const std::string line(bytes.begin() + pos, bytes.begin() + end);
      pos = end + 1;
      ++line_no;
      const auto tok = split_ws(line);
      if (tok.empty()) continue;
      if (tok.size() != token_offset) {
        fail(ErrorKind::Format, where(path, line_no) + ": expected " + std::to_string(token_offset) + " values");
      }
      for (std::size_t i = 0; i < tok.size(); ++i) {
        if (!parse_double(tok[i], values[i])) {
          fail(ErrorKind::Format, where(path, line_no) + ": cannot parse '" + tok[i] + "'");
        }
      }
      std::optional<double> t;
      if (it >= 0) t = values[fields[it].offset];
      push_point(out, {values[fields[ix].offset], values[fields[iy].offset], values[fields[iz].offset]}, t);
      ++read;
    }
    if (read != points) {
      fail(ErrorKind::Corruption, path.string() + ": PCD declares " + std::to_string(points) + " points, found " +
                                      std::to_string(read));
    }
  } else if (data == "binary") {
    const std::size_t stride = byte_offset;
    if (points > 0 && (bytes.size() - pos) / points < stride) {
      fail(ErrorKind::Corruption, path.string() + ": binary PCD payload truncated at byte " +
                                      std::to_string(bytes.size()) + ", need " + std::to_string(pos + stride * points));
    }
    for (std::size_t i = 0; i < points; ++i) {
      const std::uint8_t* rec = bytes.data() + pos + i * stride;
      auto get = [&](int f) { return read_scalar(rec + fields[f].offset, fields[f].type); };
      std::optional<double> t;
      if (it >= 0) t = get(it);
      push_point(out, {get(ix), get(iy), get(iz)}, t);
    }
  } else {
    fail(ErrorKind::Format, path.string() + ": unsupported PCD DATA mode '" + data + "'");
  }
  return out;
}

// ---------------------------------------------------------------- PLY

struct PlyProperty {
  std::string name;
  Scalar type = Scalar::F32;
  bool is_list = false;
  Scalar count_type = Scalar::U8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
};

Scalar ply_scalar(const std::string& t, const fs::path& path, std::size_t line) {
  if (t == "char" || t == "int8") return Scalar::I8;
  if (t == "uchar" || t == "uint8") return Scalar::U8;
  if (t == "short" || t == "int16") return Scalar::I16;
  if (t == "ushort" || t == "uint16") return Scalar::U16;
  if (t == "int" || t == "int32") return Scalar::I32;
  if (t == "uint" || t == "uint32") return Scalar::U32;
  if (t == "float" || t == "float32") return Scalar::F32;
  if (t == "double" || t == "float64") return Scalar::F64;
  fail(ErrorKind::Format, where(path, line) + ": unknown PLY type '" + t + "'");
}

struct PlyContents {
  std::vector<Vec3> vertices;
  std::vector<std::optional<double>> times;
  std::vector<Vec3> normals;
  std::vector<std::vector<std::uint32_t>> faces;
  bool has_time = false;
};

// Reads elements sequentially; vertex x/y/z (+time, normals) and face index lists are kept.
class PlyReader {
 public:
  PlyReader(const fs::path& path, const std::vector<std::uint8_t>& bytes) : path_(path), bytes_(bytes) {}

  PlyContents read() {
    parse_header();
    PlyContents out;
    for (const PlyElement& e : elements_) {
      for (std::size_t i = 0; i < e.count; ++i) read_record(e, out);
    }
    return out;
  }

 private:
  std::string next_line() {
    if (pos_ >= bytes_.size()) fail(ErrorKind::Corruption, path_.string() + ": unexpected end of PLY file");
    std::size_t end = pos_;
    while (end < bytes_.size() && bytes_[end] != '\n') ++end;
    std::string line(bytes_.begin() + pos_, bytes_.begin() + end);
    pos_ = std::min(end + 1, bytes_.size());
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  void parse_header() {
    if (next_line() != "ply") fail(ErrorKind::Format, path_.string() + ": missing 'ply' magic");
    for (;;) {
      const auto tok = split_ws(next_line());
      if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") continue;
      if (tok[0] == "end_header") break;
      if (tok[0] == "format") {
        if (tok.size() < 2) fail(ErrorKind::Format, where(path_, line_) + ": bad format line");
        if (tok[1] == "ascii") {
          ascii_ = true;
        } else if (tok[1] == "binary_little_endian") {
          ascii_ = false;
        } else {
          fail(ErrorKind::Format, where(path_, line_) + ": unsupported PLY format '" + tok[1] + "'");
        }
      } else if (tok[0] == "element") {
        if (tok.size() != 3) fail(ErrorKind::Format, where(path_, line_) + ": bad element line");
        PlyElement e;
        e.name = tok[1];
        if (std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), e.count).ec != std::errc()) {
          fail(ErrorKind::Format, where(path_, line_) + ": bad element count");
        }
        elements_.push_back(e);
      } else if (tok[0] == "property") {
        if (elements_.empty()) fail(ErrorKind::Format, where(path_, line_) + ": property before element");
        PlyProperty p;
        if (tok.size() == 5 && tok[1] == "list") {
          p.is_list = true;
          p.count_type = ply_scalar(tok[2], path_, line_);
          p.type = ply_scalar(tok[3], path_, line_);
          p.name = tok[4];
        } else if (tok.size() == 3) {
          p.type = ply_scalar(tok[1], path_, line_);
          p.name = tok[2];
        } else {
          fail(ErrorKind::Format, where(path_, line_) + ": bad property line");
        }
        elements_.back().props.push_back(p);
      } else {
        fail(ErrorKind::Format, where(path_, line_) + ": unknown PLY header keyword '" + tok[0] + "'");
      }
    }
    for (const PlyElement& e : elements_) {
      if (e.name != "vertex") continue;
      auto has = [&](const char* n) {
        return std::any_of(e.props.begin(), e.props.end(), [&](const PlyProperty& p) { return p.name == n; });
      };
      if (!has("x") || !has("y") || !has("z")) fail(ErrorKind::Format, path_.string() + ": PLY vertex lacks x y z");
    }
  }

  double scalar(Scalar s) {
    if (ascii_) {
      if (tok_pos_ >= tokens_.size()) fail(ErrorKind::Format, where(path_, line_) + ": too few values");
      double v = 0.0;
      if (!parse_double(tokens_[tok_pos_], v)) {
        fail(ErrorKind::Format, where(path_, line_) + ": cannot parse '" + tokens_[tok_pos_] + "'");
      }
      ++tok_pos_;
      return v;
    }
    const std::size_t n = scalar_size(s);
    if (bytes_.size() - pos_ < n) {
      fail(ErrorKind::Corruption, path_.string() + ": binary PLY payload truncated at byte " + std::to_string(pos_));
    }
    const double v = read_scalar(bytes_.data() + pos_, s);
    pos_ += n;
    return v;
  }

  void read_record(const PlyElement& e, PlyContents& out) {
    if (ascii_) {
      do {
        tokens_ = split_ws(next_line());
      } while (tokens_.empty());
      tok_pos_ = 0;
    }
    const bool vertex = e.name == "vertex";
    const bool face = e.name == "face";
    Vec3 p = Vec3::Zero(), n = Vec3::Zero();
    std::optional<double> t;
    bool has_normal = false;
    for (const PlyProperty& prop : e.props) {
      if (prop.is_list) {
        const double count = scalar(prop.count_type);
        if (!(count >= 0.0) || count > 1e6) fail(ErrorKind::Corruption, where(path_, line_) + ": bad list length");
        std::vector<std::uint32_t> idx(static_cast<std::size_t>(count));
        for (auto& v : idx) {
          const double d = scalar(prop.type);
          if (!(d >= 0.0)) fail(ErrorKind::Format, where(path_, line_) + ": negative face index");
          v = static_cast<std::uint32_t>(d);
        }
        if (face && (prop.name == "vertex_indices" || prop.name == "vertex_index")) out.faces.push_back(std::move(idx));
        continue;
      }
      const double v = scalar(prop.type);
      if (!vertex) continue;
      if (prop.name == "x") p.x() = v;
      else if (prop.name == "y") p.y() = v;
      else if (prop.name == "z") p.z() = v;
      else if (prop.name == "nx") { n.x() = v; has_normal = true; }
      else if (prop.name == "ny") n.y() = v;
      else if (prop.name == "nz") n.z() = v;
      else if (is_time_field(prop.name)) t = v;
    }
    if (vertex) {
      out.vertices.push_back(p);
      out.times.push_back(t);
      if (t) out.has_time = true;
      if (has_normal) out.normals.push_back(n);
    }
  }

  const fs::path& path_;
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
  bool ascii_ = true;
  std::vector<PlyElement> elements_;
  std::vector<std::string> tokens_;
  std::size_t tok_pos_ = 0;
};

ScanData read_xyz(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  ScanData out;
  std::istringstream is(std::string(bytes.begin(), bytes.end()));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (tok.size() < 3) fail(ErrorKind::Format, where(path, line_no) + ": expected at least 3 values");
    Vec3 p;
    for (int i = 0; i < 3; ++i) {
      if (!parse_double(tok[i], p[i])) fail(ErrorKind::Format, where(path, line_no) + ": cannot parse '" + tok[i] + "'");
    }
    push_point(out, p, std::nullopt);
  }
  return out;
}

TriangleMesh read_obj(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  TriangleMesh mesh;
  std::istringstream is(std::string(bytes.begin(), bytes.end()));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (tok[0] == "v") {
      Vec3 p;
      if (tok.size() < 4) fail(ErrorKind::Format, where(path, line_no) + ": bad vertex");
      for (int i = 0; i < 3; ++i) {
        if (!parse_double(tok[i + 1], p[i])) fail(ErrorKind::Format, where(path, line_no) + ": bad vertex");
      }
      mesh.vertices.push_back(p);
    } else if (tok[0] == "f") {
      std::vector<std::uint32_t> idx;
      for (std::size_t i = 1; i < tok.size(); ++i) {
        const std::string first = tok[i].substr(0, tok[i].find('/'));
        long long v = 0;
        if (std::from_chars(first.data(), first.data() + first.size(), v).ec != std::errc() || v == 0) {
          fail(ErrorKind::Format, where(path, line_no) + ": bad face index '" + tok[i] + "'");
        }
        const long long resolved = v > 0 ? v - 1 : static_cast<long long>(mesh.vertices.size()) + v;
        if (resolved < 0 || resolved >= static_cast<long long>(mesh.vertices.size())) {
          fail(ErrorKind::Format, where(path, line_no) + ": face index out of range");
        }
        idx.push_back(static_cast<std::uint32_t>(resolved));
      }
      for (std::size_t i = 2; i < idx.size(); ++i) mesh.triangles.push_back({idx[0], idx[i - 1], idx[i]});
    }
  }
  return mesh;
}

void write_ply_header(std::ostream& os, bool binary, std::size_t vertices, bool time, bool normals,
                      std::optional<std::size_t> faces) {
  os << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n";
  os << "element vertex " << vertices << "\nproperty double x\nproperty double y\nproperty double z\n";
  if (normals) os << "property double nx\nproperty double ny\nproperty double nz\n";
  if (time) os << "property double time\n";
  if (faces) os << "element face " << *faces << "\nproperty list uchar int vertex_indices\n";
  os << "end_header\n";
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path, bool binary) {
  std::ofstream os(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!os) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  return os;
}

void finish(std::ofstream& os, const fs::path& path) {
  os.flush();
  if (!os) fail(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

}  // namespace

ScanData read_scan(const fs::path& path) {
  const std::string ext = lower(path.extension().string());
  if (ext != ".pcd" && ext != ".ply" && ext != ".xyz" && ext != ".txt") {
    fail(ErrorKind::Format, path.string() + ": unknown point cloud extension '" + ext + "'");
  }
  const std::vector<std::uint8_t> bytes = detail::read_file(path);
  if (ext == ".pcd") return read_pcd(path, bytes);
  if (ext == ".ply") {
    PlyContents ply = PlyReader(path, bytes).read();
    ScanData out;
    for (std::size_t i = 0; i < ply.vertices.size(); ++i) {
      std::optional<double> t;
      if (ply.has_time) t = ply.times[i].value_or(0.0);
      push_point(out, ply.vertices[i], t);
    }
    return out;
  }
  return read_xyz(path, bytes);
}

void write_scan(const PointSet& points, const fs::path& path, ScanFormat format, const std::vector<double>& times) {
  const bool has_time = !times.empty();
  if (has_time && times.size() != points.size()) fail(ErrorKind::Contract, "times must match the point count");
  switch (format) {
    case ScanFormat::PcdAscii:
    case ScanFormat::PcdBinary: {
      const bool binary = format == ScanFormat::PcdBinary;
      auto os = open_out(path, binary);
      os << "# .PCD v0.7 - Point Cloud Data file format\nVERSION 0.7\n";
      os << "FIELDS x y z" << (has_time ? " time" : "") << "\nSIZE 8 8 8" << (has_time ? " 8" : "")
         << "\nTYPE F F F" << (has_time ? " F" : "") << "\nCOUNT 1 1 1" << (has_time ? " 1" : "") << "\nWIDTH "
         << points.size() << "\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\nPOINTS " << points.size() << "\nDATA "
         << (binary ? "binary" : "ascii") << "\n";
      std::vector<std::uint8_t> buf;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (binary) {
          for (int k = 0; k < 3; ++k) detail::put_le(buf, std::bit_cast<std::uint64_t>(points[i][k]));
          if (has_time) detail::put_le(buf, std::bit_cast<std::uint64_t>(times[i]));
        } else {
          os << fmt_double(points[i].x()) << ' ' << fmt_double(points[i].y()) << ' ' << fmt_double(points[i].z());
          if (has_time) os << ' ' << fmt_double(times[i]);
          os << '\n';
        }
      }
      os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
      finish(os, path);
      return;
    }
    case ScanFormat::PlyAscii:
    case ScanFormat::PlyBinary: {
      const bool binary = format == ScanFormat::PlyBinary;
      auto os = open_out(path, binary);
      write_ply_header(os, binary, points.size(), has_time, false, std::nullopt);
      std::vector<std::uint8_t> buf;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (binary) {
          for (int k = 0; k < 3; ++k) detail::put_le(buf, std::bit_cast<std::uint64_t>(points[i][k]));
          if (has_time) detail::put_le(buf, std::bit_cast<std::uint64_t>(times[i]));
        } else {
          os << fmt_double(points[i].x()) << ' ' << fmt_double(points[i].y()) << ' ' << fmt_double(points[i].z());
          if (has_time) os << ' ' << fmt_double(times[i]);
          os << '\n';
        }
      }
      os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
      finish(os, path);
      return;
    }
    case ScanFormat::Xyz: {
      auto os = open_out(path, false);
      for (const Vec3& p : points) os << fmt_double(p.x()) << ' ' << fmt_double(p.y()) << ' ' << fmt_double(p.z()) << '\n';
      finish(os, path);
      return;
    }
  }
}

void write_mesh(const TriangleMesh& mesh, const fs::path& path, MeshFormat format) {
  validate_mesh(mesh);
  const bool normals = mesh.has_normals();
  if (format == MeshFormat::Obj) {
    auto os = open_out(path, false);
    os << "# " << mesh.vertices.size() << " vertices, " << mesh.triangles.size() << " triangles\n";
    for (const Vec3& v : mesh.vertices) os << "v " << fmt_double(v.x()) << ' ' << fmt_double(v.y()) << ' ' << fmt_double(v.z()) << '\n';
    if (normals) {
      for (const Vec3& n : mesh.normals) os << "vn " << fmt_double(n.x()) << ' ' << fmt_double(n.y()) << ' ' << fmt_double(n.z()) << '\n';
    }
    for (const auto& t : mesh.triangles) {
      os << 'f';
      for (std::uint32_t i : t) {
        os << ' ' << i + 1;
        if (normals) os << "//" << i + 1;
      }
      os << '\n';
    }
    finish(os, path);
    return;
  }
  const bool binary = format == MeshFormat::PlyBinary;
  auto os = open_out(path, binary);
  write_ply_header(os, binary, mesh.vertices.size(), false, normals, mesh.triangles.size());
  if (binary) {
    std::vector<std::uint8_t> buf;
    buf.reserve(mesh.vertices.size() * (normals ? 48 : 24) + mesh.triangles.size() * 13);
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
      for (int k = 0; k < 3; ++k) detail::put_le(buf, std::bit_cast<std::uint64_t>(mesh.vertices[i][k]));
      if (normals) {
        for (int k = 0; k < 3; ++k) detail::put_le(buf, std::bit_cast<std::uint64_t>(mesh.normals[i][k]));
      }
    }
    for (const auto& t : mesh.triangles) {
      buf.push_back(3);
      for (std::uint32_t i : t) detail::put_le(buf, i);
    }
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  } else {
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
      const Vec3& v = mesh.vertices[i];
      os << fmt_double(v.x()) << ' ' << fmt_double(v.y()) << ' ' << fmt_double(v.z());
      if (normals) {
        const Vec3& n = mesh.normals[i];
        os << ' ' << fmt_double(n.x()) << ' ' << fmt_double(n.y()) << ' ' << fmt_double(n.z());
      }
      os << '\n';
    }
    for (const auto& t : mesh.triangles) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
  finish(os, path);
}

TriangleMesh read_mesh(const fs::path& path) {
  const std::string ext = lower(path.extension().string());
  if (ext != ".ply" && ext != ".obj") fail(ErrorKind::Format, path.string() + ": unknown mesh extension '" + ext + "'");
  const std::vector<std::uint8_t> bytes = detail::read_file(path);
  if (ext == ".obj") return read_obj(path, bytes);
  PlyContents ply = PlyReader(path, bytes).read();
  TriangleMesh mesh;
  mesh.vertices = std::move(ply.vertices);
  if (ply.normals.size() == mesh.vertices.size()) mesh.normals = std::move(ply.normals);
  for (const auto& f : ply.faces) {
    for (std::uint32_t i : f) {
      if (i >= mesh.vertices.size()) fail(ErrorKind::Format, path.string() + ": face index out of range");
    }
    for (std::size_t i = 2; i < f.size(); ++i) mesh.triangles.push_back({f[0], f[i - 1], f[i]});
  }
  return mesh;
}

}  // namespace dbtsdf::io
