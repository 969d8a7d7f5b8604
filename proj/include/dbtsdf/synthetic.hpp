#pragma once

#include "dbtsdf/geometry.hpp"
#include "dbtsdf/integrator.hpp"

#include <cstdint>
#include <vector>

namespace dbtsdf::synthetic {

/// Closed axis-aligned room; the sensor sits inside and sees the inner faces.
struct BoxRoom {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Ones();

  bool contains(const Vec3& p) const { return (p.array() > lo.array()).all() && (p.array() < hi.array()).all(); }
  /// Distance along unit `dir` from an interior point to the first wall.
  double ray_exit(const Vec3& origin, const Vec3& dir) const;
  /// Distance from `p` to the nearest face plane, restricted to the face rectangles.
  double distance_to_surface(const Vec3& p) const;
};

struct SpinningLidar {
  int azimuth_steps = 1024;
  int beams = 64;
  double elevation_min_deg = -30.0;
  double elevation_max_deg = 30.0;
};

/// Noise-free returns in the sensor frame for a sensor at `pose` inside `room`.
PointSet simulate_scan(const BoxRoom& room, const Pose& pose, const SpinningLidar& lidar);

/// Regular samples on all six faces with the given spacing.
PointSet sample_room_surfaces(const BoxRoom& room, double spacing);

/// Uniformly random points in the box [lo, hi).
PointSet random_points(const Vec3& lo, const Vec3& hi, std::size_t n, std::uint64_t seed);

/// Uniformly random unit vectors.
PointSet random_directions(std::size_t n, std::uint64_t seed);

/// Fixed scan set for runtime-vs-resolution studies: a 14 x 14 m room seen
/// by a narrow-band spinning LiDAR so every return keeps a full kernel
/// neighborhood inside the 22 x 22 x 8 m extent down to 0.3 m voxels.
struct BenchScene {
  Vec3 bounds_min;
  Vec3 bounds_max;
  std::vector<ScanFrame> frames;
};
BenchScene bench_scene(std::size_t points_per_frame, int frames, std::uint64_t seed = 7);

}  // namespace dbtsdf::synthetic
