#include "dbtsdf/metrics.hpp"

#include "dbtsdf/error.hpp"

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace dbtsdf {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

namespace {

using BoostPoint = bg::model::point<double, 3, bg::cs::cartesian>;
using Entry = std::pair<BoostPoint, std::uint32_t>;

BoostPoint to_boost(const Vec3& p) { return BoostPoint(p.x(), p.y(), p.z()); }

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double percent_within(const std::vector<double>& v, double t) {
  const auto n = std::count_if(v.begin(), v.end(), [t](double d) { return d <= t; });
  return 100.0 * static_cast<double>(n) / static_cast<double>(v.size());
}

}  // namespace

PointSet sample_mesh(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (n == 0) return {};
  if (mesh.triangles.empty()) fail(ErrorKind::Evaluation, "cannot sample an empty mesh");

  std::vector<double> cumulative(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    const Vec3& a = mesh.vertices[t[0]];
    total += 0.5 * (mesh.vertices[t[1]] - a).cross(mesh.vertices[t[2]] - a).norm();
    cumulative[i] = total;
  }
  if (!(total > 0.0)) fail(ErrorKind::Evaluation, "mesh has zero surface area");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  PointSet out;
  out.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double pick = uniform(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) --it;
    const auto& t = mesh.triangles[static_cast<std::size_t>(it - cumulative.begin())];
    const double r1 = std::sqrt(uniform(rng));
    const double r2 = uniform(rng);
    out.push_back((1.0 - r1) * mesh.vertices[t[0]] + r1 * (1.0 - r2) * mesh.vertices[t[1]] +
                  r1 * r2 * mesh.vertices[t[2]]);
  }
  return out;
}

std::vector<double> nn_distances(const PointSet& from, const PointSet& to) {
  if (to.empty()) fail(ErrorKind::Evaluation, "nearest-neighbor target set is empty");
  std::vector<Entry> entries;
  entries.reserve(to.size());
  for (std::size_t i = 0; i < to.size(); ++i) entries.emplace_back(to_boost(to[i]), static_cast<std::uint32_t>(i));
  const bgi::rtree<Entry, bgi::rstar<16>> tree(entries.begin(), entries.end());

  std::vector<double> out(from.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(from.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    Entry hit;
    tree.query(bgi::nearest(to_boost(from[i]), 1), &hit);
    out[i] = (from[i] - to[hit.second]).norm();
  }
  return out;
}

MetricsReport evaluate(const PointSet& pred, const PointSet& gt, double threshold) {
  if (pred.empty() || gt.empty()) fail(ErrorKind::Evaluation, "evaluation needs non-empty prediction and ground truth");
  if (!(threshold >= 0.0)) fail(ErrorKind::Evaluation, "threshold must be non-negative");
  const std::vector<double> pred_to_gt = nn_distances(pred, gt);
  const std::vector<double> gt_to_pred = nn_distances(gt, pred);

  MetricsReport r;
  r.threshold_m = threshold;
  r.n_pred = pred.size();
  r.n_gt = gt.size();
  r.accuracy_m = mean(pred_to_gt);
  r.completeness_m = mean(gt_to_pred);
  r.chamfer_l1_m = (r.accuracy_m + r.completeness_m) / 2.0;
  r.precision_pct = percent_within(pred_to_gt, threshold);
  r.recall_pct = percent_within(gt_to_pred, threshold);
  const double sum = r.precision_pct + r.recall_pct;
  r.fscore_pct = sum > 0.0 ? 2.0 * r.precision_pct * r.recall_pct / sum : 0.0;
  return r;
}

std::string to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["accuracy_m"] = r.accuracy_m;
  j["completeness_m"] = r.completeness_m;
  j["chamfer_l1_m"] = r.chamfer_l1_m;
  j["recall_pct"] = r.recall_pct;
  j["precision_pct"] = r.precision_pct;
  j["fscore_pct"] = r.fscore_pct;
  j["threshold_m"] = r.threshold_m;
  j["n_pred"] = r.n_pred;
  j["n_gt"] = r.n_gt;
  return j.dump();
}

}  // namespace dbtsdf
