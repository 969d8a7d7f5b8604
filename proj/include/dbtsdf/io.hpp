#pragma once

#include "dbtsdf/geometry.hpp"
#include "dbtsdf/grid.hpp"
#include "dbtsdf/mesher.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace dbtsdf::io {

namespace fs = std::filesystem;

struct ScanData {
  PointSet points;
  std::vector<double> times;  // empty when the file carries no time field
  std::size_t dropped_nonfinite = 0;
};

/// PCD v0.7 (ascii/binary), PLY (ascii/binary_little_endian) or XYZ text,
/// chosen by extension.
ScanData read_scan(const fs::path& path);

enum class ScanFormat { PcdAscii, PcdBinary, PlyAscii, PlyBinary, Xyz };
void write_scan(const PointSet& points, const fs::path& path, ScanFormat format,
                const std::vector<double>& times = {});

struct TrajectoryRecord {
  double timestamp = 0.0;
  Pose pose;
};
using Trajectory = std::vector<TrajectoryRecord>;

/// TUM format: "t tx ty tz qx qy qz qw" per line, '#' comments.
Trajectory read_trajectory(const fs::path& path);
void write_trajectory(const Trajectory& traj, const fs::path& path);
Pose lookup_pose(const Trajectory& traj, double t);

enum class MeshFormat { PlyBinary, PlyAscii, Obj };
void write_mesh(const TriangleMesh& mesh, const fs::path& path, MeshFormat format);
/// PLY (ascii or binary little-endian) or OBJ.
TriangleMesh read_mesh(const fs::path& path);

enum class CsvSelection { OccupiedOnly, Observed };
std::size_t export_grid_csv(const VoxelGrid& grid, const fs::path& path, CsvSelection include);

inline constexpr char kSnapshotMagic[8] = {'D', 'B', 'T', 'S', 'D', 'F', '0', '1'};
inline constexpr std::size_t kSnapshotHeaderBytes = 60;

void save_grid(const VoxelGrid& grid, const fs::path& path);
VoxelGrid load_grid(const fs::path& path);

}  // namespace dbtsdf::io
