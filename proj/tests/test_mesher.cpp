#include "dbtsdf/mesher.hpp"

#include "dbtsdf/error.hpp"
#include "dbtsdf/integrator.hpp"
#include "dbtsdf/kernels.hpp"
#include "dbtsdf/synthetic.hpp"

#include "support.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace dbtsdf;

namespace {

IntegrationParams params_with_threshold(int t) {
  IntegrationParams p;
  p.threshold = static_cast<std::uint8_t>(t);
  p.execution = Execution::Serial;
  return p;
}

// Counts how many triangles use each undirected edge.
std::map<std::pair<std::uint32_t, std::uint32_t>, int> edge_use(const TriangleMesh& m) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> out;
  for (const auto& t : m.triangles) {
    for (int k = 0; k < 3; ++k) {
      const std::uint32_t a = t[k], b = t[(k + 1) % 3];
      ++out[{std::min(a, b), std::max(a, b)}];
    }
  }
  return out;
}

bool near_integer(double v) { return std::abs(v - std::round(v)) < 1e-9; }

}  // namespace

TEST_SUITE("mesher") {

TEST_CASE("fresh grid gives an empty mesh") {
  const VoxelGrid g({10, 10, 10}, 0.1, Vec3::Zero());
  const TriangleMesh m = extract_mesh(g);
  CHECK(m.empty());
  CHECK(m.vertices.empty());
}

TEST_CASE("single occupied voxel is wrapped by a closed sphere-like surface") {
  VoxelGrid g({21, 21, 21}, 0.1, Vec3::Zero());
  KernelParams kp;
  kp.shadow_radius = 0;
  const KernelBank bank(kp);
  integrate_return(g, bank, {g.voxel_center({10, 10, 10}), Vec3(1, 0, 0)}, params_with_threshold(1));
  const TriangleMesh m = extract_mesh(g);
  validate_mesh(m);
  const auto edges = edge_use(m);
  for (const auto& [e, n] : edges) CHECK(n == 2);
  const long v = static_cast<long>(m.vertices.size());
  const long e = static_cast<long>(edges.size());
  const long f = static_cast<long>(m.triangles.size());
  CHECK(v - e + f == 2);
  // Inside corner has value 0, so every vertex snaps onto the voxel center.
  for (const Vec3& p : m.vertices) CHECK((p - g.voxel_center({10, 10, 10})).norm() < 1e-12);
}

TEST_CASE("a fused plane meshes within half a voxel of the plane") {
  const double c = 2.03;
  VoxelGrid g({60, 60, 40}, 0.1, Vec3::Zero());
  KernelParams kp;
  kp.shadow_radius = 0;
  const KernelBank bank(kp);
  std::vector<Return> returns;
  for (double x = 1.02; x < 4.99; x += 0.05) {
    for (double y = 1.02; y < 4.99; y += 0.05) returns.push_back({Vec3(x, y, c), Vec3(0.1, 0.05, -1)});
  }
  const FrameStats s = integrate_returns(g, bank, returns, params_with_threshold(1));
  REQUIRE(s.points_discarded == 0);
  const TriangleMesh m = extract_mesh(g);
  REQUIRE_FALSE(m.empty());
  validate_mesh(m);
  double worst = 0.0;
  for (const Vec3& p : m.vertices) worst = std::max(worst, std::abs(p.z() - c));
  CHECK(worst <= 0.05 + 1e-12);
}

TEST_CASE("every vertex lies on a lattice edge that crosses the surface") {
  VoxelGrid g({36, 36, 36}, 0.1, Vec3(0.5, -0.5, 1.0));
  KernelParams kp;
  kp.shadow_radius = 2;
  const KernelBank bank(kp);
  const Vec3 lo = g.origin(), hi = lo + Vec3(3.6, 3.6, 3.6);
  const PointSet pts = synthetic::random_points(lo, hi, 600, 8);
  const PointSet dirs = synthetic::random_directions(600, 9);
  std::vector<Return> returns;
  for (std::size_t i = 0; i < pts.size(); ++i) returns.push_back({pts[i], dirs[i]});
  integrate_returns(g, bank, returns, params_with_threshold(2));
  const TriangleMesh m = extract_mesh(g);
  REQUIRE(m.triangles.size() > 100);
  validate_mesh(m);

  auto occupied = [&](const Index3& i) { return g.at(i).sign == Sign::Occupied; };
  for (const Vec3& p : m.vertices) {
    const Vec3 u = (p - g.origin()) / g.voxel_size() - Vec3::Constant(0.5);
    int on = 0, free_axis = -1;
    for (int a = 0; a < 3; ++a) {
      if (near_integer(u[a])) {
        ++on;
      } else {
        free_axis = a;
      }
    }
    REQUIRE(on >= 2);
    Index3 i0{static_cast<int>(std::floor(u.x() + 1e-9)), static_cast<int>(std::floor(u.y() + 1e-9)),
              static_cast<int>(std::floor(u.z() + 1e-9))};
    if (free_axis < 0) {
      // Snapped onto a corner: that corner sits exactly at iso or inside.
      const auto sd = g.signed_distance(i0);
      REQUIRE(sd.has_value());
      CHECK((occupied(i0) || *sd == 0.0));
      continue;
    }
    Index3 i1 = i0;
    (free_axis == 0 ? i1.x : free_axis == 1 ? i1.y : i1.z) += 1;
    CHECK(occupied(i0) != occupied(i1));
  }
}

TEST_CASE("extraction is deterministic") {
  VoxelGrid g({30, 30, 30}, 0.1, Vec3::Zero());
  KernelParams kp;
  kp.shadow_radius = 2;
  const KernelBank bank(kp);
  const PointSet pts = synthetic::random_points(Vec3::Zero(), Vec3(3, 3, 3), 400, 1);
  const PointSet dirs = synthetic::random_directions(400, 2);
  std::vector<Return> returns;
  for (std::size_t i = 0; i < pts.size(); ++i) returns.push_back({pts[i], dirs[i]});
  integrate_returns(g, bank, returns, params_with_threshold(1));
  const TriangleMesh a = extract_mesh(g), b = extract_mesh(g);
  CHECK(a.vertices == b.vertices);
  CHECK(a.triangles == b.triangles);
}

TEST_CASE("cells touching unobserved voxels are skipped") {
  VoxelGrid g({4, 4, 4}, 0.1, Vec3::Zero());
  g.at({1, 1, 1}) = Voxel{0u, Sign::Occupied, 3, {0, 0}};
  CHECK(extract_mesh(g).empty());
  for (std::size_t i = 0; i < g.size(); ++i) {
    Voxel& v = g.data()[i];
    if (!v.observed()) v.mask = run_mask(2);
  }
  CHECK(extract_mesh(g).triangles.size() == 8);
}

TEST_CASE("normals of a single triangle in the xy-plane") {
  TriangleMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  m.triangles = {{0, 1, 2}};
  CHECK(compute_vertex_normals(m) == 0);
  REQUIRE(m.has_normals());
  for (const Vec3& n : m.normals) CHECK((n - Vec3(0, 0, 1)).norm() < 1e-15);
}

TEST_CASE("face-center normals of a closed cube are axis-aligned") {
  TriangleMesh m = testing::fan_cube();
  CHECK(compute_vertex_normals(m) == 0);
  const Vec3 expect[6] = {Vec3(0, 0, -1), Vec3(0, 0, 1), Vec3(0, -1, 0), Vec3(0, 1, 0), Vec3(-1, 0, 0), Vec3(1, 0, 0)};
  for (int f = 0; f < 6; ++f) CHECK((m.normals[8 + f] - expect[f]).norm() < 1e-12);
  for (int i = 0; i < 8; ++i) {
    const Vec3 outward = (m.vertices[i] - Vec3::Constant(0.5)).normalized();
    CHECK((m.normals[i] - outward).norm() < 1e-12);
  }
  for (const auto& [e, n] : edge_use(m)) CHECK(n == 2);
}

TEST_CASE("isolated vertices get zero normals and are counted") {
  TriangleMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(5, 5, 5)};
  m.triangles = {{0, 1, 2}};
  CHECK(compute_vertex_normals(m) == 1);
  CHECK(m.normals[3] == Vec3::Zero());

  TriangleMesh empty;
  CHECK(compute_vertex_normals(empty) == 0);
  CHECK(empty.vertices.empty());
  CHECK(empty.normals.empty());
}

TEST_CASE("validate_mesh rejects bad indices and non-finite vertices") {
  TriangleMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  m.triangles = {{0, 1, 3}};
  auto kind = [](const TriangleMesh& mesh) {
    try {
      validate_mesh(mesh);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Config;
  };
  CHECK(kind(m) == ErrorKind::Contract);
  m.triangles = {{0, 1, 2}};
  m.vertices[1].x() = std::numeric_limits<double>::infinity();
  CHECK(kind(m) == ErrorKind::Contract);
}

}  // TEST_SUITE
