#pragma once

#include "dbtsdf/geometry.hpp"
#include "dbtsdf/grid.hpp"
#include "dbtsdf/mesher.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace testing {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("dbtsdf_test_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

inline void spit(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  os << text;
}

/// Smallest k with k*k >= n, integers only.
inline int ceil_sqrt_exact(int n) {
  int k = 0;
  while (k * k < n) ++k;
  return k;
}

/// O(n*m) nearest-neighbor reference.
inline std::vector<double> brute_nn(const dbtsdf::PointSet& from, const dbtsdf::PointSet& to) {
  std::vector<double> out;
  out.reserve(from.size());
  for (const auto& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : to) best = std::min(best, (p - q).norm());
    out.push_back(best);
  }
  return out;
}

/// Unit cube with a center vertex on every face; each face is a four-triangle
/// fan, outward winding.
inline dbtsdf::TriangleMesh fan_cube() {
  using dbtsdf::Vec3;
  dbtsdf::TriangleMesh m;
  for (int i = 0; i < 8; ++i) m.vertices.push_back(Vec3(i & 1, (i >> 1) & 1, (i >> 2) & 1));
  // Faces as corner loops, counter-clockwise seen from outside.
  const int faces[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (const auto& f : faces) {
    Vec3 c = Vec3::Zero();
    for (int k = 0; k < 4; ++k) c += m.vertices[f[k]];
    const auto ci = static_cast<std::uint32_t>(m.vertices.size());
    m.vertices.push_back(c / 4.0);
    for (int k = 0; k < 4; ++k) {
      m.triangles.push_back({ci, static_cast<std::uint32_t>(f[k]), static_cast<std::uint32_t>(f[(k + 1) % 4])});
    }
  }
  return m;
}

inline dbtsdf::PointSet random_cloud(std::size_t n, double extent, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-extent, extent);
  dbtsdf::PointSet out(n);
  for (auto& p : out) p = dbtsdf::Vec3(u(rng), u(rng), u(rng));
  return out;
}

}  // namespace testing
