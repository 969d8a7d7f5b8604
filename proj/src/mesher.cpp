#include "dbtsdf/mesher.hpp"

#include "dbtsdf/error.hpp"
#include "mc_tables.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

namespace dbtsdf {

namespace {

// Corner i of a cell sits at (x, y, z) + kCorner[i].
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
constexpr int kEdge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                              {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

struct Corner {
  Index3 index;
  double value = 0.0;
  bool inside = false;
};

}  // namespace

TriangleMesh extract_mesh(const VoxelGrid& grid, double iso) {
  TriangleMesh mesh;
  const Dims& d = grid.dims();
  if (d.x < 2 || d.y < 2 || d.z < 2) return mesh;

  std::unordered_map<std::uint64_t, std::uint32_t> edge_vertex;
  auto vertex_on_edge = [&](const Corner& a, const Corner& b) -> std::uint32_t {
    const Corner& lo = grid.linear_index(a.index) < grid.linear_index(b.index) ? a : b;
    const Corner& hi = &lo == &a ? b : a;
    const int axis = hi.index.x != lo.index.x ? 0 : (hi.index.y != lo.index.y ? 1 : 2);
    const std::uint64_t key = static_cast<std::uint64_t>(grid.linear_index(lo.index)) * 3 + axis;
    auto [it, inserted] = edge_vertex.try_emplace(key, static_cast<std::uint32_t>(mesh.vertices.size()));
    if (inserted) {
      // Interpolate from the inside corner; equal values snap onto it.
      const Corner& in = a.inside ? a : b;
      const Corner& out = a.inside ? b : a;
      const double denom = out.value - in.value;
      const double t = denom != 0.0 ? std::clamp((iso - in.value) / denom, 0.0, 1.0) : 0.0;
      const Vec3 p0 = grid.voxel_center(in.index);
      const Vec3 p1 = grid.voxel_center(out.index);
      mesh.vertices.push_back(p0 + t * (p1 - p0));
    }
    return it->second;
  };

  Corner corners[8];
  for (int z = 0; z + 1 < d.z; ++z) {
    for (int y = 0; y + 1 < d.y; ++y) {
      for (int x = 0; x + 1 < d.x; ++x) {
        int cube = 0;
        bool observed = true;
        for (int i = 0; i < 8 && observed; ++i) {
          const Index3 idx{x + kCorner[i][0], y + kCorner[i][1], z + kCorner[i][2]};
          const Voxel& v = grid.at(idx);
          if (!v.observed()) {
            observed = false;
            break;
          }
          const double magnitude = decode_distance(v.mask) * grid.voxel_size();
          const bool inside = v.sign == Sign::Occupied;
          corners[i] = {idx, inside ? -magnitude : magnitude, inside};
          if (inside) cube |= 1 << i;
        }
        if (!observed || cube == 0 || cube == 255) continue;

        const auto& row = detail::kTriTable[cube];
        for (int t = 0; t < 16 && row[t] != -1; t += 3) {
          std::array<std::uint32_t, 3> tri;
          for (int j = 0; j < 3; ++j) {
            const int e = row[t + j];
            tri[j] = vertex_on_edge(corners[kEdge[e][0]], corners[kEdge[e][1]]);
          }
          mesh.triangles.push_back(tri);
        }
      }
    }
  }
  return mesh;
}

std::size_t compute_vertex_normals(TriangleMesh& mesh) {
  mesh.normals.assign(mesh.vertices.size(), Vec3::Zero());
  for (const auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3 n = (mesh.vertices[t[1]] - a).cross(mesh.vertices[t[2]] - a);
    for (std::uint32_t i : t) mesh.normals[i] += n;
  }
  std::size_t isolated = 0;
  for (Vec3& n : mesh.normals) {
    const double len = n.norm();
    if (len > 0.0) {
      n /= len;
    } else {
      n.setZero();
      ++isolated;
    }
  }
  return isolated;
}

void validate_mesh(const TriangleMesh& mesh) {
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    if (!mesh.vertices[i].allFinite()) fail(ErrorKind::Contract, "mesh vertex " + std::to_string(i) + " is not finite");
  }
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    for (std::uint32_t v : mesh.triangles[i]) {
      if (v >= mesh.vertices.size()) {
        fail(ErrorKind::Contract, "triangle " + std::to_string(i) + " references vertex " + std::to_string(v));
      }
    }
  }
  if (!mesh.normals.empty() && mesh.normals.size() != mesh.vertices.size()) {
    fail(ErrorKind::Contract, "normal count does not match vertex count");
  }
}

}  // namespace dbtsdf
