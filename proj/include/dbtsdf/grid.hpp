#pragma once

#include "dbtsdf/error.hpp"
#include "dbtsdf/geometry.hpp"

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace dbtsdf {

enum class Sign : std::uint8_t { Occupied = 0, Free = 1 };

/// One cell of the map. The distance mask is a low-bit run whose population
/// count is the truncated distance in voxel cells; AND of two runs is the
/// shorter run, so fusing is a single bitwise AND.
struct alignas(8) Voxel {
  std::uint32_t mask = 0xFFFFFFFFu;
  Sign sign = Sign::Free;
  std::uint8_t hits = 0;
  std::uint8_t reserved[2] = {0, 0};

  bool observed() const { return !(mask == 0xFFFFFFFFu && hits == 0); }
  bool operator==(const Voxel& o) const { return mask == o.mask && sign == o.sign && hits == o.hits; }
};
static_assert(sizeof(Voxel) == 8);

constexpr std::uint32_t run_mask(int bits) { return bits <= 0 ? 0u : (0xFFFFFFFFu >> (32 - bits)); }
constexpr bool is_run_mask(std::uint32_t m) { return (m & (m + 1)) == 0; }

inline int decode_distance(std::uint32_t mask) { return std::popcount(mask); }

/// Same as decode_distance but rejects masks that are not a low-bit run.
int decode_distance_checked(std::uint32_t mask);

struct Index3 {
  int x = 0, y = 0, z = 0;
  bool operator==(const Index3&) const = default;
};

struct Dims {
  int x = 0, y = 0, z = 0;
  std::size_t count() const {
    return static_cast<std::size_t>(x) * static_cast<std::size_t>(y) * static_cast<std::size_t>(z);
  }
  bool operator==(const Dims&) const = default;
};

inline constexpr std::size_t kVoxelBytes = sizeof(Voxel);
inline constexpr std::size_t kDefaultMemoryCap = std::size_t{16} << 30;

/// Dense, fixed-size, axis-aligned voxel grid. Structure is immutable after
/// construction; only voxel payloads change.
class VoxelGrid {
 public:
  VoxelGrid(Dims dims, double voxel_size, Vec3 origin, std::size_t memory_cap = kDefaultMemoryCap);

  const Dims& dims() const { return dims_; }
  double voxel_size() const { return voxel_size_; }
  const Vec3& origin() const { return origin_; }

  std::size_t size() const { return cells_.size(); }
  std::size_t linear_index(int ix, int iy, int iz) const {
    return static_cast<std::size_t>(ix) +
           static_cast<std::size_t>(dims_.x) *
               (static_cast<std::size_t>(iy) + static_cast<std::size_t>(dims_.y) * static_cast<std::size_t>(iz));
  }
  std::size_t linear_index(const Index3& i) const { return linear_index(i.x, i.y, i.z); }
  Index3 unravel(std::size_t linear) const;
  bool in_bounds(const Index3& i) const {
    return i.x >= 0 && i.y >= 0 && i.z >= 0 && i.x < dims_.x && i.y < dims_.y && i.z < dims_.z;
  }

  std::optional<Index3> world_to_voxel(const Vec3& p) const;
  /// Unclamped floor index; may lie outside the grid.
  Index3 world_to_index(const Vec3& p) const;
  Vec3 voxel_center(const Index3& i) const;

  Voxel& at(const Index3& i) { return cells_[linear_index(i)]; }
  const Voxel& at(const Index3& i) const { return cells_[linear_index(i)]; }
  Voxel* data() { return cells_.data(); }
  const Voxel* data() const { return cells_.data(); }
  const std::vector<Voxel>& cells() const { return cells_; }

  /// Signed distance in meters, negative on the occupied side; nullopt when
  /// the voxel has never been touched.
  std::optional<double> signed_distance(const Index3& i) const;

  std::size_t memory_bytes() const { return cells_.size() * kVoxelBytes; }

  /// Integration metadata carried by snapshots.
  std::uint8_t hit_max = 255;
  std::uint8_t threshold = 2;

  bool operator==(const VoxelGrid& o) const;

 private:
  Dims dims_;
  double voxel_size_;
  Vec3 origin_;
  std::vector<Voxel> cells_;
};

/// Nx*Ny*Nz*8 without allocating.
std::size_t memory_bytes(const Dims& dims);

/// Grid covering [lo, hi] with dims rounded up.
Dims dims_for_bounds(const Vec3& lo, const Vec3& hi, double voxel_size);

}  // namespace dbtsdf
