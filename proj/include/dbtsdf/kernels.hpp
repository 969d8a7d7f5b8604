#pragma once

#include "dbtsdf/geometry.hpp"

#include <cstdint>
#include <vector>

namespace dbtsdf {

enum class ShadowModel { Hemisphere, Cone };

struct KernelParams {
  int size = 21;               // K, odd
  int bins_azimuth = 40;
  int bins_elevation = 40;
  int shadow_radius = 1;       // r_s in voxels
  ShadowModel shadow_model = ShadowModel::Hemisphere;
  double cone_half_angle_deg = 30.0;

  bool operator==(const KernelParams&) const = default;
};

/// Shadow radius in voxels for a 5 cm physical radius, clamped to [1, R].
int default_shadow_radius(double voxel_size, int kernel_size = 21);

struct Offset {
  int x = 0, y = 0, z = 0;
  bool operator==(const Offset&) const = default;
  auto operator<=>(const Offset&) const = default;
};

struct Bin {
  int azimuth = 0;
  int elevation = 0;
  bool operator==(const Bin&) const = default;
};

/// Throws InvalidDirection for the zero vector.
Bin bin_index(const Vec3& dir, int bins_azimuth, int bins_elevation);
Vec3 bin_direction(Bin bin, int bins_azimuth, int bins_elevation);

std::uint32_t make_distance_mask(const Offset& o);

/// Offsets of the cube [-r_s, r_s]^3 belonging to the shadow region behind a
/// return travelling along `dir`, sorted lexicographically.
std::vector<Offset> build_shadow_mask(const Vec3& dir, int shadow_radius, ShadowModel model,
                                      double cone_half_angle_deg = 30.0, int kernel_size = 21);

/// Single test shared by the bank and the oracle so both agree on boundary
/// offsets perpendicular to the beam.
bool in_shadow(const Offset& o, const Vec3& dir, int shadow_radius, ShadowModel model, double cos_half_angle);

/// Shared K^3 distance kernel plus one shadow bitset per direction bin.
class KernelBank {
 public:
  explicit KernelBank(const KernelParams& params);

  const KernelParams& params() const { return params_; }
  int size() const { return params_.size; }
  int half() const { return params_.size / 2; }
  int bin_count() const { return params_.bins_azimuth * params_.bins_elevation; }
  int bin_id(Bin b) const { return b.elevation * params_.bins_azimuth + b.azimuth; }

  /// K^3 masks, x fastest.
  const std::vector<std::uint32_t>& distance_kernel() const { return distance_kernel_; }
  std::uint32_t distance_mask(const Offset& o) const { return distance_kernel_[cube_index(o)]; }

  bool shadow_contains(int bin, const Offset& o) const;
  /// Packed bitset of K^3 bits for one bin.
  const std::uint64_t* shadow_bits(int bin) const { return shadow_bits_.data() + bin * words_per_bin_; }
  /// The same set as a flat offset list, used by the integrator.
  const std::vector<Offset>& shadow_offsets(int bin) const { return shadow_offsets_[bin]; }
  const Vec3& direction(int bin) const { return bin_dirs_[bin]; }

  int shadow_size(int bin) const { return static_cast<int>(shadow_offsets_[bin].size()); }
  std::size_t memory_bytes() const;
  bool operator==(const KernelBank& o) const;

 private:
  std::size_t cube_index(const Offset& o) const;

  KernelParams params_;
  std::vector<std::uint32_t> distance_kernel_;
  std::size_t words_per_bin_ = 0;
  std::vector<std::uint64_t> shadow_bits_;
  std::vector<std::vector<Offset>> shadow_offsets_;
  std::vector<Vec3> bin_dirs_;
};

}  // namespace dbtsdf
