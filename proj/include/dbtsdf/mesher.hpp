#pragma once

#include "dbtsdf/geometry.hpp"
#include "dbtsdf/grid.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace dbtsdf {

struct TriangleMesh {
  PointSet vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<Vec3> normals;  // empty or one per vertex

  bool empty() const { return triangles.empty(); }
  bool has_normals() const { return !normals.empty() && normals.size() == vertices.size(); }
};

/// Marching cubes over the voxel-center lattice. A corner is inside when its
/// voxel is occupied; cells with an unobserved corner are skipped. Vertices
/// on a shared lattice edge are welded.
TriangleMesh extract_mesh(const VoxelGrid& grid, double iso = 0.0);

/// Area-weighted vertex normals. Returns the number of vertices that had no
/// incident area and were given a zero normal.
std::size_t compute_vertex_normals(TriangleMesh& mesh);

/// Throws a contract error if an index is out of range or a vertex is not finite.
void validate_mesh(const TriangleMesh& mesh);

}  // namespace dbtsdf
