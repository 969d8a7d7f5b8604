#pragma once

#include "dbtsdf/geometry.hpp"
#include "dbtsdf/grid.hpp"
#include "dbtsdf/kernels.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace dbtsdf {

enum class CompensationMode { None, YawOnly, FullSE3 };

/// Execution strategy for per-point kernel application. Serial is the plain
/// reference loop; Parallel distributes points over OpenMP threads using
/// atomic AND and saturating increments. Both produce identical grids.
enum class Execution { Serial, Parallel };

struct IntegrationParams {
  std::uint8_t hit_max = 255;
  std::uint8_t threshold = 2;
  CompensationMode compensation = CompensationMode::None;
  int downsample = 1;                   // keep every n-th return
  bool first_return_per_voxel = false;  // drop later returns hitting an already used center voxel
  int threads = 0;                      // 0 = OpenMP default
  Execution execution = Execution::Parallel;

  /// Throws a config error unless 1 <= threshold <= hit_max and downsample >= 1.
  void validate() const;
};

struct ScanFrame {
  PointSet points;              // sensor frame, meters
  std::vector<double> times;    // optional, normalized to [0,1], one per point
  Pose pose;                    // end-of-scan sensor pose in the map frame
  std::optional<Pose> prev_pose;
};

struct FrameStats {
  std::size_t points_in = 0;
  std::size_t points_discarded = 0;
  std::size_t points_merged = 0;   // dropped by first_return_per_voxel
  std::size_t voxels_written = 0;
  double elapsed_ms = 0.0;
};

enum class PointOutcome { Applied, Discarded };

/// Returns the scan with every point expressed in the end-of-scan sensor
/// frame after removing ego-motion between prev_pose and pose.
ScanFrame motion_compensate(const ScanFrame& scan, CompensationMode mode);

/// A map-frame return with the direction of the beam that produced it.
struct Return {
  Vec3 point;
  Vec3 direction;
};

/// True when the K^3 neighborhood of the voxel containing `p` lies inside the grid.
bool neighborhood_in_bounds(const VoxelGrid& grid, const KernelBank& bank, const Vec3& p);

/// Applies one return. `voxels_written` is incremented by the number of
/// voxels whose mask or hit counter changed.
PointOutcome integrate_return(VoxelGrid& grid, const KernelBank& bank, const Return& ret,
                              const IntegrationParams& params, std::size_t* voxels_written = nullptr);

PointOutcome integrate_point(VoxelGrid& grid, const KernelBank& bank, const Vec3& p_map, const Vec3& sensor_pos,
                             const IntegrationParams& params, std::size_t* voxels_written = nullptr);

/// Applies a batch of map-frame returns using params.execution.
FrameStats integrate_returns(VoxelGrid& grid, const KernelBank& bank, std::span<const Return> returns,
                             const IntegrationParams& params);

/// Full per-frame pipeline: downsample, compensate, transform, integrate.
FrameStats integrate_frame(VoxelGrid& grid, const KernelBank& bank, const ScanFrame& scan,
                           const IntegrationParams& params);

}  // namespace dbtsdf
