#include "dbtsdf/oracle.hpp"

#include "dbtsdf/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_set>

namespace dbtsdf {

namespace {

struct AppliedHit {
  Index3 center;
  Vec3 bin_dir;
};

int ceil_sqrt(int n) {
  int k = static_cast<int>(std::sqrt(static_cast<double>(n)));
  while (k * k < n) ++k;
  while (k > 0 && (k - 1) * (k - 1) >= n) --k;
  return k;
}

int floor_index(double v) { return static_cast<int>(std::floor(v)); }

}  // namespace

OracleField brute_force_field(std::span<const Return> returns, const GridConfig& config, const KernelParams& kernel,
                              const IntegrationParams& params) {
  const Dims& dims = config.dims;
  if (dims.x < 1 || dims.y < 1 || dims.z < 1) fail(ErrorKind::Config, "oracle grid dimensions must be >= 1");
  if (dims.count() > kOracleMaxVoxels) {
    fail(ErrorKind::Resource, "oracle scene exceeds 64^3 voxels; brute force would be intractable");
  }
  const int half = kernel.size / 2;
  const double cos_half = std::cos(kernel.cone_half_angle_deg * std::numbers::pi / 180.0);

  std::vector<AppliedHit> hits;
  std::unordered_set<long long> seen;
  for (const Return& r : returns) {
    const Vec3 rel = (r.point - config.origin) / config.voxel_size;
    const Index3 c{floor_index(rel.x()), floor_index(rel.y()), floor_index(rel.z())};
    const bool inside = c.x >= 0 && c.y >= 0 && c.z >= 0 && c.x < dims.x && c.y < dims.y && c.z < dims.z;
    if (params.first_return_per_voxel && inside) {
      const long long key = c.x + static_cast<long long>(dims.x) * (c.y + static_cast<long long>(dims.y) * c.z);
      if (!seen.insert(key).second) continue;
    }
    if (c.x < half || c.y < half || c.z < half || c.x + half >= dims.x || c.y + half >= dims.y ||
        c.z + half >= dims.z) {
      continue;
    }
    const Bin b = bin_index(r.direction, kernel.bins_azimuth, kernel.bins_elevation);
    hits.push_back({c, bin_direction(b, kernel.bins_azimuth, kernel.bins_elevation)});
  }
  std::stable_sort(hits.begin(), hits.end(),
                   [](const AppliedHit& a, const AppliedHit& b) { return a.center.z < b.center.z; });

  OracleField field;
  field.dims = dims;
  field.cells.resize(dims.count());
  const int rs = kernel.shadow_radius;
  std::size_t linear = 0;
  for (int z = 0; z < dims.z; ++z) {
    const auto first = std::lower_bound(hits.begin(), hits.end(), z - half,
                                        [](const AppliedHit& h, int v) { return h.center.z < v; });
    const auto last = std::upper_bound(hits.begin(), hits.end(), z + half,
                                       [](int v, const AppliedHit& h) { return v < h.center.z; });
    for (int y = 0; y < dims.y; ++y) {
      for (int x = 0; x < dims.x; ++x, ++linear) {
        int distance = 32;
        std::uint32_t count = 0;
        for (auto it = first; it != last; ++it) {
          const int ox = x - it->center.x;
          const int oy = y - it->center.y;
          const int oz = z - it->center.z;
          if (std::abs(ox) > half || std::abs(oy) > half) continue;
          const int r2 = ox * ox + oy * oy + oz * oz;
          distance = std::min(distance, ceil_sqrt(r2));
          if (r2 > rs * rs) continue;
          bool shadow = r2 == 0;
          if (!shadow) {
            const double dot = ox * it->bin_dir.x() + oy * it->bin_dir.y() + oz * it->bin_dir.z();
            shadow = kernel.shadow_model == ShadowModel::Hemisphere
                         ? dot >= -1e-9
                         : dot >= std::sqrt(static_cast<double>(r2)) * cos_half - 1e-9;
          }
          if (shadow) ++count;
        }
        OracleCell& cell = field.cells[linear];
        cell.distance = distance;
        cell.hits = std::min<std::uint32_t>(count, params.hit_max);
        cell.occupied = cell.hits >= params.threshold;
      }
    }
  }
  return field;
}

DiffReport compare(const VoxelGrid& grid, const OracleField& field) {
  if (!(grid.dims() == field.dims) || field.cells.size() != grid.size()) {
    fail(ErrorKind::Contract, "grid and oracle field have different dimensions");
  }
  DiffReport report;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Voxel& v = grid.cells()[i];
    const OracleCell& o = field.cells[i];
    const int distance = decode_distance(v.mask);
    const bool occupied = v.sign == Sign::Occupied;
    if (distance != o.distance || v.hits != o.hits || occupied != o.occupied) {
      report.diffs.push_back({grid.unravel(i), distance, o.distance, v.hits, static_cast<int>(o.hits), occupied,
                              o.occupied});
    }
  }
  return report;
}

std::string DiffReport::to_text(std::size_t max_rows) const {
  std::ostringstream os;
  if (diffs.empty()) {
    os << "no differences\n";
    return os.str();
  }
  os << diffs.size() << " differing voxels\n";
  os << "ix iy iz | distance grid/oracle | hits grid/oracle | occupied grid/oracle\n";
  for (std::size_t i = 0; i < diffs.size() && i < max_rows; ++i) {
    const VoxelDiff& d = diffs[i];
    os << d.index.x << ' ' << d.index.y << ' ' << d.index.z << " | " << d.grid_distance << '/' << d.oracle_distance
       << " | " << d.grid_hits << '/' << d.oracle_hits << " | " << d.grid_occupied << '/' << d.oracle_occupied << '\n';
  }
  if (diffs.size() > max_rows) os << "... " << diffs.size() - max_rows << " more\n";
  return os.str();
}

std::string DiffReport::to_json() const {
  nlohmann::ordered_json j;
  j["count"] = diffs.size();
  auto& rows = j["diffs"] = nlohmann::ordered_json::array();
  for (const VoxelDiff& d : diffs) {
    rows.push_back({{"index", {d.index.x, d.index.y, d.index.z}},
                    {"grid_distance", d.grid_distance},
                    {"oracle_distance", d.oracle_distance},
                    {"grid_hits", d.grid_hits},
                    {"oracle_hits", d.oracle_hits},
                    {"grid_occupied", d.grid_occupied},
                    {"oracle_occupied", d.oracle_occupied}});
  }
  return j.dump();
}

}  // namespace dbtsdf
