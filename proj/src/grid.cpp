#include "dbtsdf/grid.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#ifdef __linux__
#include <sys/mman.h>
#endif

namespace dbtsdf {

int decode_distance_checked(std::uint32_t mask) {
  if (!is_run_mask(mask)) {
    fail(ErrorKind::Corruption, "distance mask " + std::to_string(mask) + " is not a low-bit run");
  }
  return std::popcount(mask);
}

std::size_t memory_bytes(const Dims& dims) { return dims.count() * kVoxelBytes; }

Dims dims_for_bounds(const Vec3& lo, const Vec3& hi, double voxel_size) {
  if (!(voxel_size > 0.0)) fail(ErrorKind::Config, "voxel_size must be positive");
  const Vec3 extent = hi - lo;
  auto axis = [&](double e) {
    const double n = std::ceil(e / voxel_size - 1e-9);
    if (!(n >= 1.0) || n > std::numeric_limits<int>::max()) {
      fail(ErrorKind::Config, "world bounds give an invalid grid dimension");
    }
    return static_cast<int>(n);
  };
  return {axis(extent.x()), axis(extent.y()), axis(extent.z())};
}

VoxelGrid::VoxelGrid(Dims dims, double voxel_size, Vec3 origin, std::size_t memory_cap)
    : dims_(dims), voxel_size_(voxel_size), origin_(origin) {
  if (dims.x < 1 || dims.y < 1 || dims.z < 1) {
    fail(ErrorKind::Config, "grid dimensions must be >= 1, got " + std::to_string(dims.x) + "x" +
                                std::to_string(dims.y) + "x" + std::to_string(dims.z));
  }
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) {
    fail(ErrorKind::Config, "voxel_size must be positive and finite");
  }
  if (!origin.allFinite()) fail(ErrorKind::Config, "grid origin must be finite");
  const std::size_t count = dims.count();
  if (count / static_cast<std::size_t>(dims.x) / static_cast<std::size_t>(dims.y) !=
          static_cast<std::size_t>(dims.z) ||
      count > memory_cap / kVoxelBytes) {
    fail(ErrorKind::Resource, "grid of " + std::to_string(dims.x) + "x" + std::to_string(dims.y) + "x" +
                                  std::to_string(dims.z) + " voxels exceeds the memory cap of " +
                                  std::to_string(memory_cap) + " bytes");
  }
  cells_.reserve(count);
#ifdef __linux__
  // Kernel stamps touch K^2 rows spread across the grid; huge pages keep
  // large grids from thrashing the TLB. Must precede first touch.
  constexpr std::uintptr_t kHuge = std::uintptr_t{2} << 20;
  const auto lo = (reinterpret_cast<std::uintptr_t>(cells_.data()) + kHuge - 1) & ~(kHuge - 1);
  const auto hi = (reinterpret_cast<std::uintptr_t>(cells_.data() + count)) & ~(kHuge - 1);
  if (hi > lo) madvise(reinterpret_cast<void*>(lo), hi - lo, MADV_HUGEPAGE);
#endif
  cells_.assign(count, Voxel{});
}

Index3 VoxelGrid::unravel(std::size_t linear) const {
  const std::size_t nx = static_cast<std::size_t>(dims_.x);
  const std::size_t ny = static_cast<std::size_t>(dims_.y);
  return {static_cast<int>(linear % nx), static_cast<int>((linear / nx) % ny), static_cast<int>(linear / (nx * ny))};
}

Index3 VoxelGrid::world_to_index(const Vec3& p) const {
  const Vec3 rel = (p - origin_) / voxel_size_;
  auto to_int = [](double v) {
    const double f = std::floor(v);
    if (!(f > std::numeric_limits<int>::min() / 2 && f < std::numeric_limits<int>::max() / 2)) {
      return std::numeric_limits<int>::min() / 2;
    }
    return static_cast<int>(f);
  };
  return {to_int(rel.x()), to_int(rel.y()), to_int(rel.z())};
}

std::optional<Index3> VoxelGrid::world_to_voxel(const Vec3& p) const {
  const Index3 i = world_to_index(p);
  if (!in_bounds(i)) return std::nullopt;
  return i;
}

Vec3 VoxelGrid::voxel_center(const Index3& i) const {
  return origin_ + voxel_size_ * Vec3(i.x + 0.5, i.y + 0.5, i.z + 0.5);
}

std::optional<double> VoxelGrid::signed_distance(const Index3& i) const {
  if (!in_bounds(i)) {
    fail(ErrorKind::Contract, "voxel index (" + std::to_string(i.x) + "," + std::to_string(i.y) + "," +
                                  std::to_string(i.z) + ") out of bounds");
  }
  const Voxel& v = at(i);
  if (!v.observed()) return std::nullopt;
  const double magnitude = decode_distance(v.mask) * voxel_size_;
  return v.sign == Sign::Occupied ? -magnitude : magnitude;
}

bool VoxelGrid::operator==(const VoxelGrid& o) const {
  return dims_ == o.dims_ && voxel_size_ == o.voxel_size_ && origin_ == o.origin_ && hit_max == o.hit_max &&
         threshold == o.threshold && cells_ == o.cells_;
}

}  // namespace dbtsdf
