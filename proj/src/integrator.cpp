#include "dbtsdf/integrator.hpp"

#include "dbtsdf/error.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dbtsdf {

namespace {

// Plain loads and stores; only valid when a single thread owns the grid.
struct SerialOps {
  static std::uint32_t load_mask(const Voxel& v) { return v.mask; }
  static void and_mask(Voxel& v, std::uint32_t k) { v.mask &= k; }
  static bool increment_hits(Voxel& v, std::uint8_t hit_max, std::uint8_t threshold) {
    if (v.hits >= hit_max) return false;
    ++v.hits;
    if (v.hits >= threshold) v.sign = Sign::Occupied;
    return true;
  }
};

// Lock-free updates: AND and saturating add commute, so the final grid does
// not depend on how points are scheduled across threads.
struct AtomicOps {
  static std::uint32_t load_mask(Voxel& v) { return std::atomic_ref<std::uint32_t>(v.mask).load(std::memory_order_relaxed); }
  static void and_mask(Voxel& v, std::uint32_t k) {
    std::atomic_ref<std::uint32_t>(v.mask).fetch_and(k, std::memory_order_relaxed);
  }
  static bool increment_hits(Voxel& v, std::uint8_t hit_max, std::uint8_t threshold) {
    std::atomic_ref<std::uint8_t> hits(v.hits);
    std::uint8_t cur = hits.load(std::memory_order_relaxed);
    while (cur < hit_max) {
      if (hits.compare_exchange_weak(cur, static_cast<std::uint8_t>(cur + 1), std::memory_order_relaxed)) {
        if (cur + 1 >= threshold) std::atomic_ref<Sign>(v.sign).store(Sign::Occupied, std::memory_order_relaxed);
        return true;
      }
    }
    return false;
  }
};

bool center_in_bounds(const VoxelGrid& grid, int half, const Index3& c) {
  const Dims& d = grid.dims();
  return c.x - half >= 0 && c.y - half >= 0 && c.z - half >= 0 && c.x + half < d.x && c.y + half < d.y &&
         c.z + half < d.z;
}

template <class Ops>
PointOutcome apply_return(VoxelGrid& grid, const KernelBank& bank, const Return& ret, const IntegrationParams& params,
                          std::size_t& written) {
  const int half = bank.half();
  const int k = bank.size();
  const Index3 c = grid.world_to_index(ret.point);
  if (!center_in_bounds(grid, half, c)) return PointOutcome::Discarded;

  const KernelParams& kp = bank.params();
  const int bin = bank.bin_id(bin_index(ret.direction, kp.bins_azimuth, kp.bins_elevation));
  Voxel* cells = grid.data();

  for (const Offset& o : bank.shadow_offsets(bin)) {
    Voxel& v = cells[grid.linear_index(c.x + o.x, c.y + o.y, c.z + o.z)];
    const std::uint32_t old = Ops::load_mask(v);
    const bool mask_will_change = (old & bank.distance_mask(o)) != old;
    if (Ops::increment_hits(v, params.hit_max, params.threshold) && !mask_will_change) ++written;
  }

  const std::uint32_t* kernel = bank.distance_kernel().data();
  for (int dz = -half; dz <= half; ++dz) {
    for (int dy = -half; dy <= half; ++dy) {
      Voxel* row = cells + grid.linear_index(c.x - half, c.y + dy, c.z + dz);
      const std::uint32_t* krow = kernel + static_cast<std::size_t>(k) * ((dy + half) + k * (dz + half));
      for (int dx = 0; dx < k; ++dx) {
        const std::uint32_t old = Ops::load_mask(row[dx]);
        if ((old & krow[dx]) != old) {
          Ops::and_mask(row[dx], krow[dx]);
          ++written;
        }
      }
    }
  }
  return PointOutcome::Applied;
}

double yaw_of(const Eigen::Quaterniond& q) {
  return std::atan2(2.0 * (q.w() * q.z() + q.x() * q.y()), 1.0 - 2.0 * (q.y() * q.y() + q.z() * q.z()));
}

}  // namespace

void IntegrationParams::validate() const {
  if (threshold < 1 || threshold > hit_max) {
    fail(ErrorKind::Config, "occupancy threshold must satisfy 1 <= T <= H_max (T=" + std::to_string(threshold) +
                                ", H_max=" + std::to_string(hit_max) + ")");
  }
  if (downsample < 1) fail(ErrorKind::Config, "downsample must be >= 1");
  if (threads < 0) fail(ErrorKind::Config, "threads must be >= 0");
}

ScanFrame motion_compensate(const ScanFrame& scan, CompensationMode mode) {
  if (mode == CompensationMode::None) return scan;
  if (!scan.prev_pose) fail(ErrorKind::Config, "motion compensation requires the previous pose");

  const std::size_t n = scan.points.size();
  const bool has_times = scan.times.size() == n;
  auto time_of = [&](std::size_t i) {
    if (has_times) return scan.times[i];
    return n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 1.0;
  };

  ScanFrame out = scan;
  const Pose& end = scan.pose;
  const Pose end_inv = end.inverse();
  if (mode == CompensationMode::FullSE3) {
    for (std::size_t i = 0; i < n; ++i) {
      const Pose at_t = interpolate(*scan.prev_pose, end, time_of(i));
      out.points[i] = end_inv.apply(at_t.apply(scan.points[i]));
    }
  } else {
    const double delta =
        std::remainder(yaw_of(end.rotation) - yaw_of(scan.prev_pose->rotation), 2.0 * std::numbers::pi);
    const Eigen::Quaterniond end_rot_inv = end.rotation.conjugate();
    for (std::size_t i = 0; i < n; ++i) {
      const double behind = -(1.0 - time_of(i)) * delta;
      const Eigen::Quaterniond yaw(Eigen::AngleAxisd(behind, Vec3::UnitZ()));
      out.points[i] = end_rot_inv * (yaw * (end.rotation * scan.points[i]));
    }
  }
  return out;
}

bool neighborhood_in_bounds(const VoxelGrid& grid, const KernelBank& bank, const Vec3& p) {
  return center_in_bounds(grid, bank.half(), grid.world_to_index(p));
}

PointOutcome integrate_return(VoxelGrid& grid, const KernelBank& bank, const Return& ret,
                              const IntegrationParams& params, std::size_t* voxels_written) {
  std::size_t written = 0;
  const PointOutcome out = apply_return<SerialOps>(grid, bank, ret, params, written);
  if (voxels_written) *voxels_written += written;
  return out;
}

PointOutcome integrate_point(VoxelGrid& grid, const KernelBank& bank, const Vec3& p_map, const Vec3& sensor_pos,
                             const IntegrationParams& params, std::size_t* voxels_written) {
  const Vec3 ray = p_map - sensor_pos;
  if (!(ray.norm() >= grid.voxel_size())) return PointOutcome::Discarded;
  return integrate_return(grid, bank, {p_map, ray}, params, voxels_written);
}

FrameStats integrate_returns(VoxelGrid& grid, const KernelBank& bank, std::span<const Return> returns,
                             const IntegrationParams& params) {
  params.validate();
  grid.hit_max = params.hit_max;
  grid.threshold = params.threshold;
  FrameStats stats;
  stats.points_in = returns.size();

  std::vector<Return> unique;
  if (params.first_return_per_voxel) {
    std::unordered_set<std::size_t> seen;
    unique.reserve(returns.size());
    for (const Return& r : returns) {
      const Index3 c = grid.world_to_index(r.point);
      if (grid.in_bounds(c) && !seen.insert(grid.linear_index(c)).second) {
        ++stats.points_merged;
        continue;
      }
      unique.push_back(r);
    }
    returns = unique;
  }

  // Stamp tile by tile so consecutive stamps overlap and reuse cached rows.
  // Every update commutes, so the order does not change the grid.
  const int tile = std::max(1, bank.half());
  const Dims& d = grid.dims();
  const std::size_t tx = static_cast<std::size_t>(d.x / tile + 1), ty = static_cast<std::size_t>(d.y / tile + 1);
  constexpr std::size_t kOutside = std::numeric_limits<std::size_t>::max();
  std::vector<std::array<std::size_t, 3>> order(returns.size());
  for (std::size_t i = 0; i < returns.size(); ++i) {
    const Index3 c = grid.world_to_index(returns[i].point);
    if (grid.in_bounds(c)) {
      const std::size_t t = static_cast<std::size_t>(c.x / tile) +
                            tx * (static_cast<std::size_t>(c.y / tile) + ty * static_cast<std::size_t>(c.z / tile));
      order[i] = {t, grid.linear_index(c), i};
    } else {
      order[i] = {kOutside, kOutside, i};
    }
  }
  std::sort(order.begin(), order.end());

  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(returns.size());
  std::size_t discarded = 0;
  std::size_t written = 0;
  if (params.execution == Execution::Serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const Return& r = returns[order[i][2]];
      if (apply_return<SerialOps>(grid, bank, r, params, written) == PointOutcome::Discarded) ++discarded;
    }
  } else {
#ifdef _OPENMP
    const int threads = params.threads > 0 ? params.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : discarded, written) num_threads(threads)
#endif
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const Return& r = returns[order[i][2]];
      if (apply_return<AtomicOps>(grid, bank, r, params, written) == PointOutcome::Discarded) ++discarded;
    }
  }
  stats.points_discarded = discarded;
  stats.voxels_written = written;
  return stats;
}

FrameStats integrate_frame(VoxelGrid& grid, const KernelBank& bank, const ScanFrame& scan,
                           const IntegrationParams& params) {
  params.validate();
  const auto start = std::chrono::steady_clock::now();
  if (scan.points.empty()) return {};
  check_rotation(scan.pose);
  if (scan.prev_pose) check_rotation(*scan.prev_pose);

  const bool has_times = scan.times.size() == scan.points.size();
  ScanFrame kept;
  kept.pose = scan.pose;
  kept.prev_pose = scan.prev_pose;
  if (params.downsample > 1) {
    const std::size_t step = static_cast<std::size_t>(params.downsample);
    for (std::size_t i = 0; i < scan.points.size(); i += step) {
      kept.points.push_back(scan.points[i]);
      if (has_times) kept.times.push_back(scan.times[i]);
    }
  } else {
    kept.points = scan.points;
    kept.times = scan.times;
  }
  // Timestamps default to the position in the original sweep.
  if (!has_times && params.downsample > 1 && kept.points.size() > 1) {
    const double last = static_cast<double>(scan.points.size() - 1);
    for (std::size_t i = 0; i < kept.points.size(); ++i) kept.times.push_back(i * params.downsample / last);
  }

  const ScanFrame compensated = motion_compensate(kept, params.compensation);
  const Vec3 sensor = scan.pose.translation;
  std::vector<Return> returns;
  returns.reserve(compensated.points.size());
  std::size_t too_close = 0;
  for (const Vec3& p : compensated.points) {
    const Vec3 world = scan.pose.apply(p);
    const Vec3 ray = world - sensor;
    if (!(ray.norm() >= grid.voxel_size())) {
      ++too_close;
      continue;
    }
    returns.push_back({world, ray});
  }

  FrameStats stats = integrate_returns(grid, bank, returns, params);
  stats.points_in += too_close;
  stats.points_discarded += too_close;
  stats.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return stats;
}

}  // namespace dbtsdf
