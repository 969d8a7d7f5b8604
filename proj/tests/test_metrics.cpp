#include "dbtsdf/metrics.hpp"

#include "dbtsdf/error.hpp"

#include "support.hpp"

#include <json.hpp>
#include <doctest.h>

#include <numeric>

using namespace dbtsdf;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Contract;
}

TriangleMesh unit_square() {
  TriangleMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("area-uniform sampling splits a unit square evenly") {
  const std::size_t n = 100000;
  const PointSet s = sample_mesh(unit_square(), n, 1234);
  REQUIRE(s.size() == n);
  std::size_t lower = 0;
  for (const Vec3& p : s) {
    CHECK(p.z() == 0.0);
    CHECK(p.x() >= 0.0);
    CHECK(p.x() <= 1.0);
    CHECK(p.y() >= 0.0);
    CHECK(p.y() <= 1.0);
    if (p.y() < p.x()) ++lower;
  }
  const double sigma = std::sqrt(n * 0.25);
  CHECK(std::abs(static_cast<double>(lower) - n / 2.0) <= 3.0 * sigma);
}

TEST_CASE("sampling follows triangle area") {
  // Triangle areas 1 and 3.
  TriangleMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(0, 1, 0), Vec3(10, 0, 0), Vec3(16, 0, 0), Vec3(10, 1, 0)};
  m.triangles = {{0, 1, 2}, {3, 4, 5}};
  const std::size_t n = 40000;
  const PointSet s = sample_mesh(m, n, 5);
  const auto small = std::count_if(s.begin(), s.end(), [](const Vec3& p) { return p.x() < 5; });
  const double sigma = std::sqrt(n * 0.25 * 0.75);
  CHECK(std::abs(static_cast<double>(small) - n * 0.25) <= 3.0 * sigma);
}

TEST_CASE("sampling is reproducible per seed and handles n = 0") {
  const TriangleMesh m = testing::fan_cube();
  CHECK(sample_mesh(m, 0, 1).empty());
  CHECK(sample_mesh(m, 500, 99) == sample_mesh(m, 500, 99));
  CHECK_FALSE(sample_mesh(m, 500, 99) == sample_mesh(m, 500, 100));
}

TEST_CASE("sampling an empty or zero-area mesh is an evaluation error") {
  CHECK(kind_of([] { sample_mesh(TriangleMesh{}, 10, 1); }) == ErrorKind::Evaluation);
  TriangleMesh flat;
  flat.vertices = {Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(2, 2, 2)};
  flat.triangles = {{0, 1, 2}};
  CHECK(kind_of([&] { sample_mesh(flat, 10, 1); }) == ErrorKind::Evaluation);
  CHECK(sample_mesh(TriangleMesh{}, 0, 1).empty());
}

TEST_CASE("nearest-neighbor distances") {
  const PointSet a = testing::random_cloud(50, 2.0, 4);
  for (double d : nn_distances(a, a)) CHECK(d == 0.0);
  const auto d = nn_distances({Vec3(0, 0, 0)}, {Vec3(1, 0, 0), Vec3(0, 2, 0)});
  REQUIRE(d.size() == 1);
  CHECK(d[0] == 1.0);
  CHECK(nn_distances({}, a).empty());
  CHECK(kind_of([&] { nn_distances(a, {}); }) == ErrorKind::Evaluation);
}

TEST_CASE("nearest-neighbor distances equal a brute-force double loop") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const PointSet from = testing::random_cloud(500, 1.0, seed);
    const PointSet to = testing::random_cloud(500, 1.0, seed + 100);
    const auto fast = nn_distances(from, to);
    const auto ref = testing::brute_nn(from, to);
    REQUIRE(fast.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) REQUIRE(std::abs(fast[i] - ref[i]) <= 1e-9);
  }
}

TEST_CASE("identical sets are perfect") {
  const PointSet a = testing::random_cloud(200, 3.0, 8);
  const MetricsReport r = evaluate(a, a, 0.1);
  CHECK(r.accuracy_m == 0.0);
  CHECK(r.completeness_m == 0.0);
  CHECK(r.chamfer_l1_m == 0.0);
  CHECK(r.recall_pct == 100.0);
  CHECK(r.precision_pct == 100.0);
  CHECK(r.fscore_pct == 100.0);
  CHECK(r.n_pred == 200);
  CHECK(r.n_gt == 200);
  CHECK(r.threshold_m == 0.1);
}

TEST_CASE("uniform offset below the threshold") {
  PointSet gt;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) gt.push_back(Vec3(10.0 * i, 10.0 * j, 0));
  }
  PointSet pred = gt;
  for (Vec3& p : pred) p.x() += 0.05;
  const MetricsReport r = evaluate(pred, gt, 0.1);
  CHECK(r.recall_pct == 100.0);
  CHECK(r.precision_pct == 100.0);
  CHECK(r.accuracy_m == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(r.completeness_m == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("five hand-placed points") {
  // gt on the x axis at 0..4. pred nn->gt: 0.05, 0.2, 0, 0.5, 6.
  // gt nn->pred: 0.05, 0.2, 0, 0.5, 0.5.
  const PointSet gt{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(3, 0, 0), Vec3(4, 0, 0)};
  const PointSet pred{Vec3(0, 0.05, 0), Vec3(1, 0.2, 0), Vec3(2, 0, 0), Vec3(3.5, 0, 0), Vec3(10, 0, 0)};

  const MetricsReport a = evaluate(pred, gt, 0.1);
  CHECK(a.accuracy_m == doctest::Approx(1.35).epsilon(1e-12));
  CHECK(a.completeness_m == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(a.chamfer_l1_m == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(a.precision_pct == 40.0);
  CHECK(a.recall_pct == 40.0);
  CHECK(a.fscore_pct == doctest::Approx(40.0).epsilon(1e-12));

  const MetricsReport b = evaluate(pred, gt, 0.5);
  CHECK(b.precision_pct == 80.0);
  CHECK(b.recall_pct == 100.0);
  CHECK(b.fscore_pct == doctest::Approx(2.0 * 80.0 * 100.0 / 180.0).epsilon(1e-12));

  const MetricsReport c = evaluate(pred, gt, 0.0);
  CHECK(c.precision_pct == 20.0);
  CHECK(c.recall_pct == 20.0);
}

TEST_CASE("threshold zero counts only exact matches") {
  const PointSet gt{Vec3(0, 0, 0), Vec3(1, 0, 0)};
  const PointSet pred{Vec3(0, 0, 0), Vec3(1, 1e-12, 0)};
  const MetricsReport r = evaluate(pred, gt, 0.0);
  CHECK(r.recall_pct == 50.0);
  CHECK(r.precision_pct == 50.0);
}

TEST_CASE("empty inputs are evaluation errors") {
  const PointSet a{Vec3(0, 0, 0)};
  CHECK(kind_of([&] { evaluate({}, a, 0.1); }) == ErrorKind::Evaluation);
  CHECK(kind_of([&] { evaluate(a, {}, 0.1); }) == ErrorKind::Evaluation);
}

TEST_CASE("fscore is zero when nothing is within the threshold") {
  const MetricsReport r = evaluate({Vec3(0, 0, 0)}, {Vec3(5, 0, 0)}, 0.1);
  CHECK(r.precision_pct == 0.0);
  CHECK(r.recall_pct == 0.0);
  CHECK(r.fscore_pct == 0.0);
}

TEST_CASE("swapping the sets swaps accuracy and completeness") {
  const PointSet a = testing::random_cloud(300, 1.0, 31);
  const PointSet b = testing::random_cloud(400, 1.2, 32);
  const MetricsReport ab = evaluate(a, b, 0.1), ba = evaluate(b, a, 0.1);
  CHECK(ab.accuracy_m == ba.completeness_m);
  CHECK(ab.completeness_m == ba.accuracy_m);
  CHECK(ab.precision_pct == ba.recall_pct);
  CHECK(ab.chamfer_l1_m == (ab.accuracy_m + ab.completeness_m) / 2.0);
}

TEST_CASE("metrics are invariant under a shared rigid motion") {
  const PointSet a = testing::random_cloud(300, 1.0, 41);
  const PointSet b = testing::random_cloud(300, 1.0, 42);
  Pose T;
  T.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(0.9, Vec3(1, 2, 3).normalized()));
  T.translation = Vec3(5, -7, 11);
  PointSet ta, tb;
  for (const Vec3& p : a) ta.push_back(T.apply(p));
  for (const Vec3& p : b) tb.push_back(T.apply(p));
  const MetricsReport r0 = evaluate(a, b, 0.15), r1 = evaluate(ta, tb, 0.15);
  CHECK(std::abs(r0.accuracy_m - r1.accuracy_m) <= 1e-9);
  CHECK(std::abs(r0.completeness_m - r1.completeness_m) <= 1e-9);
  CHECK(std::abs(r0.chamfer_l1_m - r1.chamfer_l1_m) <= 1e-9);
  CHECK(std::abs(r0.recall_pct - r1.recall_pct) <= 1e-9);
  CHECK(std::abs(r0.precision_pct - r1.precision_pct) <= 1e-9);
  CHECK(std::abs(r0.fscore_pct - r1.fscore_pct) <= 1e-9);
}

TEST_CASE("recall and precision never decrease with the threshold") {
  const PointSet a = testing::random_cloud(300, 1.0, 51);
  const PointSet b = testing::random_cloud(300, 1.0, 52);
  double last_r = -1.0, last_p = -1.0;
  for (double t = 0.0; t <= 0.5; t += 0.01) {
    const MetricsReport r = evaluate(a, b, t);
    CHECK(r.recall_pct >= last_r);
    CHECK(r.precision_pct >= last_p);
    CHECK(r.recall_pct <= 100.0);
    CHECK(r.fscore_pct >= 0.0);
    const double pr = r.precision_pct + r.recall_pct;
    CHECK(r.fscore_pct == doctest::Approx(pr > 0 ? 2 * r.precision_pct * r.recall_pct / pr : 0.0));
    last_r = r.recall_pct;
    last_p = r.precision_pct;
  }
  CHECK(last_r == 100.0);
}

TEST_CASE("report JSON uses the field names") {
  const MetricsReport r = evaluate({Vec3(0, 0, 0)}, {Vec3(0.5, 0, 0)}, 0.1);
  const auto j = nlohmann::json::parse(to_json(r));
  for (const char* k : {"accuracy_m", "completeness_m", "chamfer_l1_m", "recall_pct", "precision_pct", "fscore_pct",
                        "threshold_m", "n_pred", "n_gt"}) {
    CHECK(j.contains(k));
  }
  CHECK(j.size() == 9);
  CHECK(j["accuracy_m"].get<double>() == 0.5);
  CHECK(j["n_gt"].get<int>() == 1);
}

}  // TEST_SUITE
