#include "dbtsdf/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>

namespace dbtsdf::synthetic {

double BoxRoom::ray_exit(const Vec3& origin, const Vec3& dir) const {
  double t = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    if (dir[k] > 0.0) t = std::min(t, (hi[k] - origin[k]) / dir[k]);
    if (dir[k] < 0.0) t = std::min(t, (lo[k] - origin[k]) / dir[k]);
  }
  return t;
}

double BoxRoom::distance_to_surface(const Vec3& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    for (double plane : {lo[axis], hi[axis]}) {
      Vec3 q = p;
      q[axis] = plane;
      for (int k = 0; k < 3; ++k) {
        if (k != axis) q[k] = std::clamp(q[k], lo[k], hi[k]);
      }
      best = std::min(best, (p - q).norm());
    }
  }
  return best;
}

PointSet simulate_scan(const BoxRoom& room, const Pose& pose, const SpinningLidar& lidar) {
  PointSet out;
  out.reserve(static_cast<std::size_t>(lidar.azimuth_steps) * lidar.beams);
  const Pose inv = pose.inverse();
  const double deg = std::numbers::pi / 180.0;
  for (int b = 0; b < lidar.beams; ++b) {
    const double el = lidar.beams > 1
                          ? (lidar.elevation_min_deg +
                             (lidar.elevation_max_deg - lidar.elevation_min_deg) * b / (lidar.beams - 1)) * deg
                          : lidar.elevation_min_deg * deg;
    for (int a = 0; a < lidar.azimuth_steps; ++a) {
      const double az = 2.0 * std::numbers::pi * a / lidar.azimuth_steps;
      const Vec3 local(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
      const Vec3 dir = pose.rotation * local;
      const double t = room.ray_exit(pose.translation, dir);
      if (!std::isfinite(t)) continue;
      out.push_back(inv.apply(pose.translation + t * dir));
    }
  }
  return out;
}

PointSet sample_room_surfaces(const BoxRoom& room, double spacing) {
  PointSet out;
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3;
    const int v = (axis + 2) % 3;
    const int nu = std::max(1, static_cast<int>(std::round((room.hi[u] - room.lo[u]) / spacing)));
    const int nv = std::max(1, static_cast<int>(std::round((room.hi[v] - room.lo[v]) / spacing)));
    for (double plane : {room.lo[axis], room.hi[axis]}) {
      for (int i = 0; i <= nu; ++i) {
        for (int j = 0; j <= nv; ++j) {
          Vec3 p;
          p[axis] = plane;
          p[u] = room.lo[u] + (room.hi[u] - room.lo[u]) * i / nu;
          p[v] = room.lo[v] + (room.hi[v] - room.lo[v]) * j / nv;
          out.push_back(p);
        }
      }
    }
  }
  return out;
}

PointSet random_points(const Vec3& lo, const Vec3& hi, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointSet out(n);
  for (Vec3& p : out) {
    for (int k = 0; k < 3; ++k) p[k] = lo[k] + (hi[k] - lo[k]) * u(rng);
  }
  return out;
}

PointSet random_directions(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  PointSet out;
  out.reserve(n);
  while (out.size() < n) {
    const Vec3 v(g(rng), g(rng), g(rng));
    const double len = v.norm();
    if (len > 1e-12) out.push_back(v / len);
  }
  return out;
}

BenchScene bench_scene(std::size_t points_per_frame, int frames, std::uint64_t seed) {
  BenchScene scene;
  scene.bounds_min = Vec3(0.0, 0.0, 0.0);
  scene.bounds_max = Vec3(22.0, 22.0, 8.0);
  const BoxRoom room{Vec3(4.0, 4.0, 0.0), Vec3(18.0, 18.0, 8.0)};
  SpinningLidar lidar;
  lidar.beams = 32;
  lidar.elevation_min_deg = -4.0;
  lidar.elevation_max_deg = 4.0;
  lidar.azimuth_steps = static_cast<int>((points_per_frame + lidar.beams - 1) / lidar.beams);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.2, 0.2);
  std::optional<Pose> prev;
  for (int f = 0; f < frames; ++f) {
    ScanFrame frame;
    frame.pose.translation = Vec3(11.0 + jitter(rng), 11.0 + jitter(rng), 4.0);
    frame.pose.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(0.05 * f, Vec3::UnitZ()));
    frame.points = simulate_scan(room, frame.pose, lidar);
    frame.points.resize(std::min(frame.points.size(), points_per_frame));
    frame.prev_pose = prev;
    prev = frame.pose;
    scene.frames.push_back(std::move(frame));
  }
  return scene;
}

}  // namespace dbtsdf::synthetic
