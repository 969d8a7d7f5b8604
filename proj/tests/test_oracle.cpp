#include "dbtsdf/oracle.hpp"

#include "dbtsdf/error.hpp"
#include "dbtsdf/synthetic.hpp"

#include "support.hpp"

#include <doctest.h>

#include <bit>

using namespace dbtsdf;

namespace {

std::vector<Return> random_returns(const GridConfig& c, std::size_t n, std::uint64_t seed) {
  const Vec3 hi = c.origin + c.voxel_size * Vec3(c.dims.x, c.dims.y, c.dims.z);
  const PointSet pts = synthetic::random_points(c.origin, hi, n, seed);
  const PointSet dirs = synthetic::random_directions(n, seed + 1);
  std::vector<Return> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({pts[i], dirs[i]});
  return out;
}

VoxelGrid fuse(const GridConfig& c, const KernelParams& kp, const IntegrationParams& ip,
               const std::vector<Return>& returns) {
  VoxelGrid g(c.dims, c.voxel_size, c.origin);
  const KernelBank bank(kp);
  integrate_returns(g, bank, returns, ip);
  return g;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("no hits leaves every distance at 32 and nothing occupied") {
  const GridConfig c{{8, 9, 10}, 0.1, Vec3::Zero()};
  const OracleField f = brute_force_field({}, c, KernelParams{}, IntegrationParams{});
  REQUIRE(f.cells.size() == 720);
  for (const OracleCell& cell : f.cells) {
    CHECK(cell.distance == 32);
    CHECK(cell.hits == 0);
    CHECK_FALSE(cell.occupied);
  }
}

TEST_CASE("one hit at the center reproduces the distance kernel") {
  const GridConfig c{{25, 25, 25}, 0.2, Vec3(-2.5, -2.5, -2.5)};
  const Vec3 center = c.origin + c.voxel_size * Vec3(12.5, 12.5, 12.5);
  const std::vector<Return> r{{center, Vec3(0, 1, 0)}};
  const OracleField f = brute_force_field(r, c, KernelParams{}, IntegrationParams{});
  for (int z = 0; z < 25; ++z) {
    for (int y = 0; y < 25; ++y) {
      for (int x = 0; x < 25; ++x) {
        const Offset o{x - 12, y - 12, z - 12};
        const int d = f.cells[x + 25 * (y + 25 * z)].distance;
        if (std::max({std::abs(o.x), std::abs(o.y), std::abs(o.z)}) > 10) {
          REQUIRE(d == 32);
        } else {
          REQUIRE(d == std::popcount(make_distance_mask(o)));
        }
      }
    }
  }
}

TEST_CASE("midpoint between two hits four voxels apart is two cells from both") {
  const GridConfig c{{41, 25, 25}, 0.1, Vec3::Zero()};
  auto center = [&](int x, int y, int z) -> Vec3 { return c.origin + c.voxel_size * Vec3(x + 0.5, y + 0.5, z + 0.5); };
  const std::vector<Return> r{{center(18, 12, 12), Vec3(1, 0, 0)}, {center(22, 12, 12), Vec3(1, 0, 0)}};
  const OracleField f = brute_force_field(r, c, KernelParams{}, IntegrationParams{});
  CHECK(f.cells[20 + 41 * (12 + 25 * 12)].distance == 2);
  CHECK(f.cells[18 + 41 * (12 + 25 * 12)].distance == 0);
  CHECK(f.cells[15 + 41 * (12 + 25 * 12)].distance == 3);
  CHECK(f.cells[25 + 41 * (12 + 25 * 12)].distance == 3);
}

TEST_CASE("fast path matches the oracle on random scenes") {
  struct Case {
    Dims dims;
    int rs;
    ShadowModel model;
    int threshold, hit_max;
    bool first_return;
    std::size_t n;
  };
  const Case cases[] = {
      {{48, 48, 48}, 3, ShadowModel::Hemisphere, 2, 255, false, 3000},
      {{40, 32, 36}, 2, ShadowModel::Cone, 1, 255, false, 2000},
      {{32, 32, 32}, 4, ShadowModel::Hemisphere, 2, 3, false, 3000},
      {{32, 32, 32}, 1, ShadowModel::Hemisphere, 2, 255, true, 4000},
      {{24, 24, 24}, 0, ShadowModel::Cone, 1, 1, false, 500},
  };
  std::uint64_t seed = 40;
  for (const Case& k : cases) {
    CAPTURE(k.rs);
    const GridConfig c{k.dims, 0.1, Vec3(-1, 2, 0.5)};
    KernelParams kp;
    kp.shadow_radius = k.rs;
    kp.shadow_model = k.model;
    kp.cone_half_angle_deg = 40.0;
    IntegrationParams ip;
    ip.threshold = static_cast<std::uint8_t>(k.threshold);
    ip.hit_max = static_cast<std::uint8_t>(k.hit_max);
    ip.first_return_per_voxel = k.first_return;
    const auto returns = random_returns(c, k.n, seed += 2);
    const VoxelGrid g = fuse(c, kp, ip, returns);
    const DiffReport d = compare(g, brute_force_field(returns, c, kp, ip));
    CHECK_MESSAGE(d.empty(), d.to_text());
  }
}

TEST_CASE("a single corrupted voxel yields exactly one diff") {
  const GridConfig c{{30, 30, 30}, 0.1, Vec3::Zero()};
  KernelParams kp;
  kp.shadow_radius = 2;
  const IntegrationParams ip;
  const auto returns = random_returns(c, 200, 77);
  VoxelGrid g = fuse(c, kp, ip, returns);
  const OracleField f = brute_force_field(returns, c, kp, ip);
  REQUIRE(compare(g, f).empty());
  g.at({15, 15, 15}).hits += 1;
  const DiffReport d = compare(g, f);
  REQUIRE(d.diffs.size() == 1);
  CHECK(d.diffs[0].index == Index3{15, 15, 15});
  CHECK(d.diffs[0].grid_hits == d.diffs[0].oracle_hits + 1);
  CHECK(d.to_text().find("1 differing voxels") != std::string::npos);
  CHECK(d.to_json().find("\"count\":1") != std::string::npos);
}

TEST_CASE("empty scene on both sides gives an empty diff") {
  const GridConfig c{{16, 16, 16}, 0.1, Vec3::Zero()};
  const VoxelGrid g(c.dims, c.voxel_size, c.origin);
  const DiffReport d = compare(g, brute_force_field({}, c, KernelParams{}, IntegrationParams{}));
  CHECK(d.empty());
  CHECK(d.to_text() == "no differences\n");
}

TEST_CASE("oracle guards its scene size and checks dimensions") {
  const GridConfig big{{65, 64, 64}, 0.1, Vec3::Zero()};
  try {
    brute_force_field({}, big, KernelParams{}, IntegrationParams{});
    FAIL("expected a resource error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Resource);
  }
  const GridConfig c{{8, 8, 8}, 0.1, Vec3::Zero()};
  const VoxelGrid g({8, 8, 9}, 0.1, Vec3::Zero());
  try {
    compare(g, brute_force_field({}, c, KernelParams{}, IntegrationParams{}));
    FAIL("expected a contract error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Contract);
  }
}

}  // TEST_SUITE
