// Trajectories, CSV export and DBTSDF01 grid snapshots.
#include "dbtsdf/io.hpp"

#include "byte_io.hpp"
#include "dbtsdf/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace dbtsdf::io {

namespace {

std::ofstream open_text(const fs::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  return os;
}

}  // namespace

Trajectory read_trajectory(const fs::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::Io, "cannot open trajectory '" + path.string() + "'");
  Trajectory traj;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double v[8];
    std::string tok;
    int n = 0;
    while (ls >> tok) {
      if (n == 8) {
        n = 9;
        break;
      }
      const char* b = tok.data();
      auto [ptr, ec] = std::from_chars(b, b + tok.size(), v[n]);
      if (ec != std::errc() || ptr != b + tok.size() || !std::isfinite(v[n])) {
        fail(ErrorKind::Format, path.string() + ":" + std::to_string(line_no) + ": cannot parse '" + tok + "'");
      }
      ++n;
    }
    if (n != 8) {
      fail(ErrorKind::Format, path.string() + ":" + std::to_string(line_no) +
                                  ": expected 't tx ty tz qx qy qz qw'");
    }
    TrajectoryRecord rec;
    rec.timestamp = v[0];
    rec.pose.translation = Vec3(v[1], v[2], v[3]);
    Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);
    const double norm = q.norm();
    if (std::abs(norm - 1.0) > 1e-3) {
      fail(ErrorKind::Format, path.string() + ":" + std::to_string(line_no) + ": quaternion norm " +
                                  std::to_string(norm) + " is not unit");
    }
    rec.pose.rotation = q.normalized();
    if (!traj.empty() && !(rec.timestamp > traj.back().timestamp)) {
      fail(ErrorKind::Format, path.string() + ":" + std::to_string(line_no) + ": timestamps must strictly increase");
    }
    traj.push_back(rec);
  }
  return traj;
}

void write_trajectory(const Trajectory& traj, const fs::path& path) {
  auto os = open_text(path);
  os << "# timestamp tx ty tz qx qy qz qw\n";
  char buf[512];
  for (const auto& r : traj) {
    const auto& q = r.pose.rotation;
    const auto& t = r.pose.translation;
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n", r.timestamp, t.x(), t.y(),
                  t.z(), q.x(), q.y(), q.z(), q.w());
    os << buf;
  }
  if (!os) fail(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

Pose lookup_pose(const Trajectory& traj, double t) {
  if (traj.empty()) fail(ErrorKind::Contract, "pose lookup on an empty trajectory");
  if (t <= traj.front().timestamp) return traj.front().pose;
  if (t >= traj.back().timestamp) return traj.back().pose;
  const auto hi = std::upper_bound(traj.begin(), traj.end(), t,
                                   [](double v, const TrajectoryRecord& r) { return v < r.timestamp; });
  const auto lo = hi - 1;
  if (t == lo->timestamp) return lo->pose;
  const double alpha = (t - lo->timestamp) / (hi->timestamp - lo->timestamp);
  return interpolate(lo->pose, hi->pose, alpha);
}

std::size_t export_grid_csv(const VoxelGrid& grid, const fs::path& path, CsvSelection include) {
  auto os = open_text(path);
  os << "x,y,z,sdf,hits,sign\n";
  std::size_t rows = 0;
  char buf[160];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Voxel& v = grid.cells()[i];
    if (!v.observed()) continue;
    if (include == CsvSelection::OccupiedOnly && v.sign != Sign::Occupied) continue;
    const Index3 idx = grid.unravel(i);
    const Vec3 c = grid.voxel_center(idx);
    const double sdf = *grid.signed_distance(idx);
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%u,%u\n", c.x(), c.y(), c.z(), sdf,
                  static_cast<unsigned>(v.hits), static_cast<unsigned>(v.sign));
    os << buf;
    ++rows;
  }
  if (!os) fail(ErrorKind::Io, "failed writing '" + path.string() + "'");
  return rows;
}

void save_grid(const VoxelGrid& grid, const fs::path& path) {
  std::vector<std::uint8_t> buf;
  buf.reserve(kSnapshotHeaderBytes + grid.memory_bytes());
  buf.insert(buf.end(), kSnapshotMagic, kSnapshotMagic + 8);
  detail::put_le(buf, static_cast<std::uint32_t>(grid.dims().x));
  detail::put_le(buf, static_cast<std::uint32_t>(grid.dims().y));
  detail::put_le(buf, static_cast<std::uint32_t>(grid.dims().z));
  detail::put_le(buf, std::bit_cast<std::uint64_t>(grid.voxel_size()));
  for (int k = 0; k < 3; ++k) detail::put_le(buf, std::bit_cast<std::uint64_t>(grid.origin()[k]));
  buf.push_back(grid.hit_max);
  buf.push_back(grid.threshold);
  buf.insert(buf.end(), 6, 0);
  for (const Voxel& v : grid.cells()) {
    detail::put_le(buf, v.mask);
    buf.push_back(static_cast<std::uint8_t>(v.sign));
    buf.push_back(v.hits);
    buf.push_back(0);
    buf.push_back(0);
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!os) fail(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

VoxelGrid load_grid(const fs::path& path) {
  const std::vector<std::uint8_t> bytes = detail::read_file(path);
  const std::string name = path.string();
  if (bytes.size() < kSnapshotHeaderBytes) {
    fail(ErrorKind::Corruption, name + ": file has " + std::to_string(bytes.size()) + " bytes, shorter than the header");
  }
  if (std::memcmp(bytes.data(), kSnapshotMagic, 8) != 0) fail(ErrorKind::Corruption, name + ": bad snapshot magic");
  const std::uint8_t* p = bytes.data() + 8;
  const std::uint32_t nx = detail::get_le<std::uint32_t>(p);
  const std::uint32_t ny = detail::get_le<std::uint32_t>(p + 4);
  const std::uint32_t nz = detail::get_le<std::uint32_t>(p + 8);
  const double voxel_size = std::bit_cast<double>(detail::get_le<std::uint64_t>(p + 12));
  const Vec3 origin(std::bit_cast<double>(detail::get_le<std::uint64_t>(p + 20)),
                    std::bit_cast<double>(detail::get_le<std::uint64_t>(p + 28)),
                    std::bit_cast<double>(detail::get_le<std::uint64_t>(p + 36)));
  const std::uint8_t hit_max = p[44];
  const std::uint8_t threshold = p[45];
  constexpr std::uint32_t kMaxDim = static_cast<std::uint32_t>(std::numeric_limits<int>::max());
  if (nx == 0 || ny == 0 || nz == 0) fail(ErrorKind::Corruption, name + ": header has a zero dimension");
  if (nx > kMaxDim || ny > kMaxDim || nz > kMaxDim) fail(ErrorKind::Corruption, name + ": dimension overflow");
  const unsigned __int128 count = static_cast<unsigned __int128>(nx) * ny * nz;
  const unsigned __int128 payload = bytes.size() - kSnapshotHeaderBytes;
  if (count * kVoxelBytes != payload) {
    fail(ErrorKind::Corruption, name + ": payload of " + std::to_string(bytes.size() - kSnapshotHeaderBytes) +
                                    " bytes does not match the header dimensions");
  }
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size) || !origin.allFinite()) {
    fail(ErrorKind::Corruption, name + ": invalid voxel size or origin");
  }
  for (int i = 46; i < 52; ++i) {
    if (p[i] != 0) fail(ErrorKind::Corruption, name + ": reserved header bytes are not zero");
  }

  VoxelGrid grid({static_cast<int>(nx), static_cast<int>(ny), static_cast<int>(nz)}, voxel_size, origin);
  grid.hit_max = hit_max;
  grid.threshold = threshold;
  Voxel* cells = grid.data();
  const std::uint8_t* rec = bytes.data() + kSnapshotHeaderBytes;
  for (std::size_t i = 0; i < grid.size(); ++i, rec += kVoxelBytes) {
    const std::uint32_t mask = detail::get_le<std::uint32_t>(rec);
    if (!is_run_mask(mask) || rec[4] > 1) {
      fail(ErrorKind::Corruption, name + ": invalid voxel record at byte " +
                                      std::to_string(kSnapshotHeaderBytes + i * kVoxelBytes));
    }
    cells[i].mask = mask;
    cells[i].sign = static_cast<Sign>(rec[4]);
    cells[i].hits = rec[5];
  }
  return grid;
}

}  // namespace dbtsdf::io
