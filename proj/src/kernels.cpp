#include "dbtsdf/kernels.hpp"

#include "dbtsdf/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace dbtsdf {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Offsets lying on the plane through the contact voxel perpendicular to the
// beam belong to the hemisphere; the slack absorbs rounding in bin directions.
constexpr double kPlaneSlack = 1e-9;

int clamp_bin(double raw, int bins) {
  const double f = std::floor(raw);
  if (f < 0.0) return 0;
  if (f >= bins) return bins - 1;
  return static_cast<int>(f);
}

int max_radius_for_mask(int half) {
  // ceil(sqrt(3) * R) bits must fit in 32.
  return static_cast<int>(std::ceil(std::sqrt(3.0) * half));
}

}  // namespace

int default_shadow_radius(double voxel_size, int kernel_size) {
  const int half = kernel_size / 2;
  const int r = std::max(1, static_cast<int>(std::lround(0.05 / voxel_size)));
  return std::min(r, half);
}

Bin bin_index(const Vec3& dir, int bins_azimuth, int bins_elevation) {
  const double norm = dir.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    fail(ErrorKind::InvalidDirection, "cannot bin a zero-length or non-finite direction");
  }
  double azimuth = std::atan2(dir.y(), dir.x());
  if (azimuth < 0.0) azimuth += kTwoPi;
  const double elevation = std::asin(std::clamp(dir.z() / norm, -1.0, 1.0));
  return {clamp_bin(azimuth / kTwoPi * bins_azimuth, bins_azimuth),
          clamp_bin((elevation + std::numbers::pi / 2.0) / std::numbers::pi * bins_elevation, bins_elevation)};
}

Vec3 bin_direction(Bin bin, int bins_azimuth, int bins_elevation) {
  if (bin.azimuth < 0 || bin.azimuth >= bins_azimuth || bin.elevation < 0 || bin.elevation >= bins_elevation) {
    fail(ErrorKind::Contract, "bin (" + std::to_string(bin.azimuth) + "," + std::to_string(bin.elevation) +
                                  ") out of range");
  }
  const double a = (bin.azimuth + 0.5) * kTwoPi / bins_azimuth;
  const double e = (bin.elevation + 0.5) * std::numbers::pi / bins_elevation - std::numbers::pi / 2.0;
  return {std::cos(e) * std::cos(a), std::cos(e) * std::sin(a), std::sin(e)};
}

std::uint32_t make_distance_mask(const Offset& o) {
  const double r = std::sqrt(static_cast<double>(o.x * o.x + o.y * o.y + o.z * o.z));
  if (r == 0.0) return 0u;
  return 0xFFFFFFFFu >> (32 - static_cast<int>(std::ceil(r)));
}

bool in_shadow(const Offset& o, const Vec3& dir, int shadow_radius, ShadowModel model, double cos_half_angle) {
  const int r2 = o.x * o.x + o.y * o.y + o.z * o.z;
  if (r2 > shadow_radius * shadow_radius) return false;
  if (r2 == 0) return true;
  const double dot = o.x * dir.x() + o.y * dir.y() + o.z * dir.z();
  if (model == ShadowModel::Hemisphere) return dot >= -kPlaneSlack;
  return dot >= std::sqrt(static_cast<double>(r2)) * cos_half_angle - kPlaneSlack;
}

std::vector<Offset> build_shadow_mask(const Vec3& dir, int shadow_radius, ShadowModel model,
                                      double cone_half_angle_deg, int kernel_size) {
  const int half = kernel_size / 2;
  if (shadow_radius < 0 || shadow_radius > half) {
    fail(ErrorKind::Config, "shadow radius " + std::to_string(shadow_radius) + " outside [0, " +
                                std::to_string(half) + "]");
  }
  const double cos_half = std::cos(cone_half_angle_deg * std::numbers::pi / 180.0);
  std::vector<Offset> out;
  for (int x = -shadow_radius; x <= shadow_radius; ++x) {
    for (int y = -shadow_radius; y <= shadow_radius; ++y) {
      for (int z = -shadow_radius; z <= shadow_radius; ++z) {
        const Offset o{x, y, z};
        if (in_shadow(o, dir, shadow_radius, model, cos_half)) out.push_back(o);
      }
    }
  }
  return out;
}

KernelBank::KernelBank(const KernelParams& params) : params_(params) {
  const int k = params.size;
  if (k < 1 || k % 2 == 0) fail(ErrorKind::Config, "kernel size must be odd and positive, got " + std::to_string(k));
  if (max_radius_for_mask(k / 2) > 32) {
    fail(ErrorKind::Config, "kernel size " + std::to_string(k) + " exceeds the 32-bit distance range");
  }
  if (params.bins_azimuth < 1 || params.bins_elevation < 1) fail(ErrorKind::Config, "bin counts must be >= 1");
  if (params.shadow_model == ShadowModel::Cone &&
      !(params.cone_half_angle_deg > 0.0 && params.cone_half_angle_deg <= 90.0)) {
    fail(ErrorKind::Config, "cone half-angle must lie in (0, 90] degrees");
  }
  const int half = k / 2;

  distance_kernel_.resize(static_cast<std::size_t>(k) * k * k);
  for (int z = -half; z <= half; ++z) {
    for (int y = -half; y <= half; ++y) {
      for (int x = -half; x <= half; ++x) {
        const Offset o{x, y, z};
        distance_kernel_[cube_index(o)] = make_distance_mask(o);
      }
    }
  }

  const int bins = bin_count();
  const std::size_t cube = distance_kernel_.size();
  words_per_bin_ = (cube + 63) / 64;
  shadow_bits_.assign(words_per_bin_ * bins, 0);
  shadow_offsets_.resize(bins);
  bin_dirs_.resize(bins);
  for (int el = 0; el < params.bins_elevation; ++el) {
    for (int az = 0; az < params.bins_azimuth; ++az) {
      const Bin b{az, el};
      const int id = bin_id(b);
      bin_dirs_[id] = bin_direction(b, params.bins_azimuth, params.bins_elevation);
      auto offsets = build_shadow_mask(bin_dirs_[id], params.shadow_radius, params.shadow_model,
                                       params.cone_half_angle_deg, k);
      std::uint64_t* bits = shadow_bits_.data() + id * words_per_bin_;
      for (const Offset& o : offsets) {
        const std::size_t idx = cube_index(o);
        bits[idx / 64] |= std::uint64_t{1} << (idx % 64);
      }
      shadow_offsets_[id] = std::move(offsets);
    }
  }
}

std::size_t KernelBank::cube_index(const Offset& o) const {
  const int k = params_.size;
  const int half = k / 2;
  return static_cast<std::size_t>((o.x + half) + k * ((o.y + half) + k * (o.z + half)));
}

bool KernelBank::shadow_contains(int bin, const Offset& o) const {
  const int half = this->half();
  if (std::abs(o.x) > half || std::abs(o.y) > half || std::abs(o.z) > half) return false;
  const std::size_t idx = cube_index(o);
  return (shadow_bits(bin)[idx / 64] >> (idx % 64)) & 1u;
}

std::size_t KernelBank::memory_bytes() const {
  return distance_kernel_.size() * sizeof(std::uint32_t) + shadow_bits_.size() * sizeof(std::uint64_t);
}

bool KernelBank::operator==(const KernelBank& o) const {
  return params_ == o.params_ && distance_kernel_ == o.distance_kernel_ && shadow_bits_ == o.shadow_bits_ &&
         shadow_offsets_ == o.shadow_offsets_ && bin_dirs_ == o.bin_dirs_;
}

}  // namespace dbtsdf
