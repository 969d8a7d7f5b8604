#pragma once

#include "dbtsdf/grid.hpp"
#include "dbtsdf/integrator.hpp"
#include "dbtsdf/kernels.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dbtsdf {

struct OracleCell {
  int distance = 32;
  std::uint32_t hits = 0;
  bool occupied = false;
};

struct OracleField {
  Dims dims;
  std::vector<OracleCell> cells;
};

struct GridConfig {
  Dims dims;
  double voxel_size = 1.0;
  Vec3 origin = Vec3::Zero();
};

inline constexpr std::size_t kOracleMaxVoxels = std::size_t{64} * 64 * 64;

/// Exhaustive per-voxel recomputation of the fused field from its
/// definition. Independent of the stamping loop used by the integrator.
OracleField brute_force_field(std::span<const Return> returns, const GridConfig& config,
                              const KernelParams& kernel, const IntegrationParams& params);

struct VoxelDiff {
  Index3 index;
  int grid_distance = 0, oracle_distance = 0;
  int grid_hits = 0, oracle_hits = 0;
  bool grid_occupied = false, oracle_occupied = false;
};

struct DiffReport {
  std::vector<VoxelDiff> diffs;
  bool empty() const { return diffs.empty(); }
  std::string to_text(std::size_t max_rows = 20) const;
  std::string to_json() const;
};

DiffReport compare(const VoxelGrid& grid, const OracleField& field);

}  // namespace dbtsdf
