#pragma once

#include "dbtsdf/geometry.hpp"
#include "dbtsdf/mesher.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dbtsdf {

struct MetricsReport {
  double accuracy_m = 0.0;
  double completeness_m = 0.0;
  double chamfer_l1_m = 0.0;
  double recall_pct = 0.0;
  double precision_pct = 0.0;
  double fscore_pct = 0.0;
  double threshold_m = 0.0;
  std::size_t n_pred = 0;
  std::size_t n_gt = 0;
};

/// Area-uniform surface samples, reproducible for a given seed.
PointSet sample_mesh(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

/// Exact nearest-neighbor distance from each `from` point to the `to` set.
std::vector<double> nn_distances(const PointSet& from, const PointSet& to);

MetricsReport evaluate(const PointSet& pred, const PointSet& gt, double threshold);

/// Flat JSON object using the MetricsReport field names.
std::string to_json(const MetricsReport& report);

}  // namespace dbtsdf
