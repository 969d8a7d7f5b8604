#include "dbtsdf/kernels.hpp"

#include "dbtsdf/error.hpp"
#include "dbtsdf/grid.hpp"

#include "support.hpp"

#include <doctest.h>

#include <bit>
#include <cmath>
#include <numbers>
#include <set>

using namespace dbtsdf;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Exact shadow region by enumeration, with no slack.
std::set<Offset> enumerate_shadow(const Vec3& d, int rs, ShadowModel model, double half_angle_deg) {
  std::set<Offset> out;
  const double c = std::cos(half_angle_deg * kDeg);
  for (int z = -rs; z <= rs; ++z) {
    for (int y = -rs; y <= rs; ++y) {
      for (int x = -rs; x <= rs; ++x) {
        const int r2 = x * x + y * y + z * z;
        if (r2 > rs * rs) continue;
        const double dot = x * d.x() + y * d.y() + z * d.z();
        // Boundary offsets count as inside; 1e-9 absorbs cos() rounding at exact angles.
        const bool in = model == ShadowModel::Hemisphere ? dot >= -1e-9
                                                         : (r2 == 0 || dot >= std::sqrt(double(r2)) * c - 1e-9);
        if (in) out.insert({x, y, z});
      }
    }
  }
  return out;
}

std::set<Offset> as_set(const std::vector<Offset>& v) { return {v.begin(), v.end()}; }

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Contract;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("bin_index on the axes") {
  CHECK(bin_index(Vec3(1, 0, 0), 40, 40) == Bin{0, 20});
  CHECK(bin_index(Vec3(0, 0, 1), 40, 40) == Bin{0, 39});
  CHECK(bin_index(Vec3(0, -1, 0), 40, 40) == Bin{30, 20});
  CHECK(bin_index(Vec3(0, 0, -1), 40, 40) == Bin{0, 0});
  CHECK(bin_index(Vec3(-1, 0, 0), 40, 40) == Bin{20, 20});
  CHECK(bin_index(Vec3(0, 1, 0), 40, 40) == Bin{10, 20});
  // Scale does not matter.
  CHECK(bin_index(Vec3(0, -7, 0), 40, 40) == Bin{30, 20});
}

TEST_CASE("bin_index stays in range for directions just below the wrap") {
  const Vec3 d(1.0, -1e-15, 0.0);
  const Bin b = bin_index(d, 40, 40);
  CHECK(b.azimuth >= 0);
  CHECK(b.azimuth <= 39);
}

TEST_CASE("bin_index rejects zero and non-finite directions") {
  CHECK(kind_of([] { bin_index(Vec3::Zero(), 40, 40); }) == ErrorKind::InvalidDirection);
  CHECK(kind_of([] { bin_index(Vec3(std::nan(""), 0, 0), 40, 40); }) == ErrorKind::InvalidDirection);
}

TEST_CASE("bin_direction points at the bin center") {
  const Vec3 v = bin_direction({0, 20}, 40, 40);
  const double a = 4.5 * kDeg, e = 2.25 * kDeg;
  CHECK(std::abs(v.x() - std::cos(e) * std::cos(a)) < 1e-15);
  CHECK(std::abs(v.y() - std::cos(e) * std::sin(a)) < 1e-15);
  CHECK(std::abs(v.z() - std::sin(e)) < 1e-15);
  CHECK(std::abs(v.norm() - 1.0) < 1e-12);
}

TEST_CASE("every bin direction is unit length and bins back to itself") {
  for (int el = 0; el < 40; ++el) {
    for (int az = 0; az < 40; ++az) {
      const Vec3 v = bin_direction({az, el}, 40, 40);
      CHECK(std::abs(v.norm() - 1.0) < 1e-12);
      CHECK(bin_index(v, 40, 40) == Bin{az, el});
    }
  }
}

TEST_CASE("bin_direction rejects out-of-range bins") {
  CHECK(kind_of([] { bin_direction({40, 0}, 40, 40); }) == ErrorKind::Contract);
  CHECK(kind_of([] { bin_direction({0, -1}, 40, 40); }) == ErrorKind::Contract);
}

TEST_CASE("distance masks on hand-checked offsets") {
  CHECK(make_distance_mask({0, 0, 0}) == 0x00000000u);
  CHECK(make_distance_mask({1, 0, 0}) == 0x00000001u);
  CHECK(make_distance_mask({1, 2, 0}) == 0x00000007u);
  CHECK(make_distance_mask({10, 10, 10}) == run_mask(18));
}

TEST_CASE("distance mask equals an integer ceil-sqrt run over the whole cube") {
  for (int z = -10; z <= 10; ++z) {
    for (int y = -10; y <= 10; ++y) {
      for (int x = -10; x <= 10; ++x) {
        const int k = testing::ceil_sqrt_exact(x * x + y * y + z * z);
        const std::uint32_t expect = k == 0 ? 0u : (0xFFFFFFFFu >> (32 - k));
        REQUIRE(make_distance_mask({x, y, z}) == expect);
      }
    }
  }
}

TEST_CASE("hemisphere of radius 1 along +x has six offsets") {
  const auto s = as_set(build_shadow_mask(Vec3(1, 0, 0), 1, ShadowModel::Hemisphere));
  const std::set<Offset> expect{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  CHECK(s == expect);
  CHECK(s == enumerate_shadow(Vec3(1, 0, 0), 1, ShadowModel::Hemisphere, 30.0));
}

TEST_CASE("radius zero leaves only the center") {
  for (const Vec3& d : {Vec3(1, 0, 0), Vec3(0.3, -0.4, 0.866), Vec3(0, 0, -1)}) {
    for (ShadowModel m : {ShadowModel::Hemisphere, ShadowModel::Cone}) {
      CHECK(build_shadow_mask(d.normalized(), 0, m) == std::vector<Offset>{{0, 0, 0}});
    }
  }
}

TEST_CASE("cone is a subset of the hemisphere") {
  for (double angle : {10.0, 30.0, 45.0, 89.0, 90.0}) {
    const auto cone = as_set(build_shadow_mask(Vec3(1, 0, 0), 2, ShadowModel::Cone, angle));
    const auto hemi = as_set(build_shadow_mask(Vec3(1, 0, 0), 2, ShadowModel::Hemisphere));
    CHECK(std::includes(hemi.begin(), hemi.end(), cone.begin(), cone.end()));
    CHECK(cone.count({0, 0, 0}) == 1);
  }
  const auto cone45 = as_set(build_shadow_mask(Vec3(1, 0, 0), 2, ShadowModel::Cone, 45.0));
  CHECK(cone45 == enumerate_shadow(Vec3(1, 0, 0), 2, ShadowModel::Cone, 45.0));
}

TEST_CASE("shadow masks match exhaustive enumeration for random directions") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Vec3 d = Vec3(n(rng), n(rng), n(rng)).normalized();
    const int rs = 1 + i % 6;
    CHECK(as_set(build_shadow_mask(d, rs, ShadowModel::Hemisphere)) ==
          enumerate_shadow(d, rs, ShadowModel::Hemisphere, 30.0));
    CHECK(as_set(build_shadow_mask(d, rs, ShadowModel::Cone, 30.0)) ==
          enumerate_shadow(d, rs, ShadowModel::Cone, 30.0));
  }
}

TEST_CASE("shadow radius beyond the kernel half-extent is a configuration error") {
  CHECK(kind_of([] { build_shadow_mask(Vec3(1, 0, 0), 11, ShadowModel::Hemisphere, 30.0, 21); }) ==
        ErrorKind::Config);
  KernelParams kp;
  kp.shadow_radius = 11;
  CHECK(kind_of([&] { KernelBank b(kp); }) == ErrorKind::Config);
}

TEST_CASE("default bank has 1600 bins and a 9261-entry kernel") {
  const KernelBank bank(KernelParams{});
  CHECK(bank.bin_count() == 1600);
  CHECK(bank.distance_kernel().size() == 9261);
  CHECK(bank.distance_mask({0, 0, 0}) == 0u);
  int max_pop = 0;
  for (std::uint32_t m : bank.distance_kernel()) max_pop = std::max(max_pop, std::popcount(m));
  // ceil(sqrt(3) * 10) computed with integers: ceil(sqrt(300)).
  CHECK(max_pop == testing::ceil_sqrt_exact(300));
  CHECK(max_pop == 18);
  CHECK(bank.memory_bytes() < 2u * 1024 * 1024);
}

TEST_CASE("minimal bank") {
  KernelParams kp;
  kp.size = 3;
  kp.bins_azimuth = 1;
  kp.bins_elevation = 1;
  kp.shadow_radius = 1;
  const KernelBank bank(kp);
  CHECK(bank.distance_kernel().size() == 27);
  CHECK(bank.distance_mask({0, 0, 0}) == 0u);
  CHECK(bank.bin_count() == 1);
  CHECK(bank.shadow_contains(0, {0, 0, 0}));
}

TEST_CASE("kernel layout is x fastest") {
  KernelParams kp;
  kp.size = 5;
  kp.shadow_radius = 1;
  const KernelBank bank(kp);
  const auto& k = bank.distance_kernel();
  for (int z = -2; z <= 2; ++z) {
    for (int y = -2; y <= 2; ++y) {
      for (int x = -2; x <= 2; ++x) {
        CHECK(k[(x + 2) + 5 * ((y + 2) + 5 * (z + 2))] == make_distance_mask({x, y, z}));
      }
    }
  }
}

TEST_CASE("invalid bank parameters are configuration errors") {
  KernelParams even;
  even.size = 20;
  CHECK(kind_of([&] { KernelBank b(even); }) == ErrorKind::Config);
  KernelParams too_big;
  too_big.size = 41;  // ceil(sqrt(3) * 20) = 35 bits
  too_big.shadow_radius = 1;
  CHECK(kind_of([&] { KernelBank b(too_big); }) == ErrorKind::Config);
  KernelParams no_bins;
  no_bins.bins_azimuth = 0;
  CHECK(kind_of([&] { KernelBank b(no_bins); }) == ErrorKind::Config);
  KernelParams flat_cone;
  flat_cone.shadow_model = ShadowModel::Cone;
  flat_cone.cone_half_angle_deg = 0.0;
  CHECK(kind_of([&] { KernelBank b(flat_cone); }) == ErrorKind::Config);
}

TEST_CASE("every shadow contains the center and stays inside r_s") {
  for (ShadowModel model : {ShadowModel::Hemisphere, ShadowModel::Cone}) {
    KernelParams kp;
    kp.shadow_radius = 3;
    kp.shadow_model = model;
    const KernelBank bank(kp);
    for (int b = 0; b < bank.bin_count(); ++b) {
      CHECK(bank.shadow_contains(b, {0, 0, 0}));
      for (const Offset& o : bank.shadow_offsets(b)) {
        CHECK(o.x * o.x + o.y * o.y + o.z * o.z <= 9);
        CHECK(bank.shadow_contains(b, o));
      }
      // The bitset and the offset list hold the same set.
      int bits = 0;
      const int words = (21 * 21 * 21 + 63) / 64;
      for (int w = 0; w < words; ++w) bits += std::popcount(bank.shadow_bits(b)[w]);
      CHECK(bits == bank.shadow_size(b));
    }
  }
}

TEST_CASE("bank shadows match enumeration with the quantized bin direction") {
  KernelParams kp;
  kp.shadow_radius = 4;
  const KernelBank bank(kp);
  for (int b = 0; b < bank.bin_count(); b += 7) {
    CHECK(as_set(bank.shadow_offsets(b)) == enumerate_shadow(bank.direction(b), 4, ShadowModel::Hemisphere, 30.0));
  }
}

TEST_CASE("distance kernel is invariant under axis permutations and sign flips") {
  const KernelBank bank(KernelParams{});
  for (int z = -10; z <= 10; ++z) {
    for (int y = -10; y <= 10; ++y) {
      for (int x = -10; x <= 10; ++x) {
        const std::uint32_t m = bank.distance_mask({x, y, z});
        REQUIRE(bank.distance_mask({-x, y, z}) == m);
        REQUIRE(bank.distance_mask({x, -y, -z}) == m);
        REQUIRE(bank.distance_mask({y, z, x}) == m);
        REQUIRE(bank.distance_mask({z, x, y}) == m);
        REQUIRE(bank.distance_mask({y, x, z}) == m);
      }
    }
  }
}

TEST_CASE("hemisphere of the opposite bin is the point reflection") {
  KernelParams kp;
  kp.shadow_radius = 5;
  const KernelBank bank(kp);
  for (int el = 0; el < 40; ++el) {
    for (int az = 0; az < 40; ++az) {
      const int b = bank.bin_id({az, el});
      const int opp = bank.bin_id({(az + 20) % 40, 39 - el});
      REQUIRE((bank.direction(b) + bank.direction(opp)).norm() < 1e-12);
      std::set<Offset> reflected;
      for (const Offset& o : bank.shadow_offsets(b)) reflected.insert({-o.x, -o.y, -o.z});
      CHECK(reflected == as_set(bank.shadow_offsets(opp)));
    }
  }
}

TEST_CASE("banks built twice are identical") {
  KernelParams kp;
  kp.shadow_radius = 3;
  const KernelBank a(kp), b(kp);
  CHECK(a == b);
  for (int i = 0; i < a.bin_count(); ++i) REQUIRE(a.shadow_offsets(i) == b.shadow_offsets(i));
}

TEST_CASE("default shadow radius is a 5 cm ball in whole voxels") {
  CHECK(default_shadow_radius(0.05) == 1);
  CHECK(default_shadow_radius(0.3) == 1);
  CHECK(default_shadow_radius(0.01) == 5);
  CHECK(default_shadow_radius(0.02) == 3);  // round(2.5) away from zero
  CHECK(default_shadow_radius(0.001) == 10);
  CHECK(default_shadow_radius(0.001, 7) == 3);
}

}  // TEST_SUITE
