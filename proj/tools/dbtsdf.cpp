#include "commands.hpp"

#include "dbtsdf/error.hpp"
#include "dbtsdf/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <map>

using namespace dbtsdf;
using namespace dbtsdf::cli;
using json = nlohmann::ordered_json;

namespace {

struct ConfigSource {
  std::string file;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", file, "JSON config file");
    for (const std::string& key : config_keys()) {
      app->add_option_function<std::string>(
          "--" + key, [this, key](const std::string& v) { overrides[key] = v; }, "override " + key);
    }
  }

  RunConfig load() const {
    RunConfig c = file.empty() ? RunConfig{} : load_config(file);
    for (const auto& [k, v] : overrides) apply_override(c, k, v);
    return c;
  }
};

void print_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distance-bitmask TSDF mapping for LiDAR scans"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "machine-readable summaries on stdout");

  ConfigSource fuse_cfg;
  CLI::App* fuse = app.add_subcommand("fuse", "integrate scans into a grid snapshot");
  fuse_cfg.attach(fuse);

  std::string mesh_in, mesh_out, mesh_format = "ply";
  bool no_normals = false;
  CLI::App* mesh = app.add_subcommand("mesh", "extract a triangle mesh from a snapshot");
  mesh->add_option("snapshot", mesh_in)->required()->check(CLI::ExistingFile);
  mesh->add_option("-o,--out", mesh_out)->required();
  mesh->add_option("-f,--format", mesh_format)->check(CLI::IsMember({"ply", "ply-ascii", "obj"}));
  mesh->add_flag("--no-normals", no_normals);

  std::string eval_pred, eval_gt, eval_out;
  double eval_threshold = 0.1;
  std::size_t eval_samples = 1000000;
  std::uint64_t eval_seed = 0;
  CLI::App* eval = app.add_subcommand("eval", "compare a reconstruction against ground truth");
  eval->add_option("pred", eval_pred, "mesh (sampled) or point cloud")->required();
  eval->add_option("gt", eval_gt, "point cloud or mesh")->required();
  eval->add_option("-t,--threshold", eval_threshold, "distance threshold in meters")->check(CLI::NonNegativeNumber);
  eval->add_option("-n,--samples", eval_samples, "points sampled from mesh inputs");
  eval->add_option("-s,--seed", eval_seed);
  eval->add_option("-o,--out", eval_out, "JSON report path");

  std::string export_in, export_out, export_format = "csv";
  bool export_observed = false;
  CLI::App* exp = app.add_subcommand("export", "dump voxels as CSV or a PCD point cloud");
  exp->add_option("snapshot", export_in)->required()->check(CLI::ExistingFile);
  exp->add_option("-o,--out", export_out)->required();
  exp->add_option("-f,--format", export_format)->check(CLI::IsMember({"csv", "pcd"}));
  exp->add_flag("--observed", export_observed, "include observed free voxels");

  ConfigSource bench_cfg;
  std::vector<double> bench_sizes{0.3, 0.2, 0.1, 0.05};
  int bench_repeats = 3;
  std::size_t bench_points = 50000;
  int bench_frames = 5;
  std::string bench_csv_path;
  CLI::App* bench = app.add_subcommand("bench", "frame latency and memory versus voxel size");
  bench_cfg.attach(bench);
  bench->add_option("--sizes", bench_sizes)->delimiter(',');
  bench->add_option("--repeats", bench_repeats);
  bench->add_option("--synthetic-points", bench_points, "points per synthetic frame when no scans are configured");
  bench->add_option("--frames", bench_frames, "frames per repeat");
  bench->add_option("--csv", bench_csv_path, "write the timing table here");

  std::string info_in;
  CLI::App* info = app.add_subcommand("info", "describe a snapshot");
  info->add_option("snapshot", info_in)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*fuse) {
      const FuseResult r = cmd_fuse(fuse_cfg.load());
      print_warnings(r.warnings);
      std::size_t points = 0, discarded = 0;
      for (const FrameStats& s : r.frames) {
        points += s.points_in;
        discarded += s.points_discarded;
      }
      if (as_json) {
        json j{{"snapshot", r.snapshot.string()},
               {"stats_log", r.stats_log.string()},
               {"config", r.resolved_config.string()},
               {"frames", r.frames.size()},
               {"skipped_scans", r.skipped_scans},
               {"points", points},
               {"discarded", discarded}};
        std::cout << j.dump() << '\n';
      } else {
        std::cout << "fused " << r.frames.size() << " frames (" << points << " points, " << discarded
                  << " discarded, " << r.skipped_scans << " scans skipped)\n"
                  << "snapshot: " << r.snapshot.string() << '\n'
                  << "stats:    " << r.stats_log.string() << '\n'
                  << "config:   " << r.resolved_config.string() << '\n';
      }
    } else if (*mesh) {
      const io::MeshFormat f = mesh_format == "obj"         ? io::MeshFormat::Obj
                               : mesh_format == "ply-ascii" ? io::MeshFormat::PlyAscii
                                                            : io::MeshFormat::PlyBinary;
      const MeshSummary s = cmd_mesh(mesh_in, mesh_out, f, !no_normals);
      if (as_json) {
        std::cout << json{{"mesh", mesh_out}, {"vertices", s.vertices}, {"triangles", s.triangles}}.dump() << '\n';
      } else {
        std::cout << "wrote " << mesh_out << ": " << s.vertices << " vertices, " << s.triangles << " triangles\n";
      }
    } else if (*eval) {
      std::optional<fs::path> out;
      if (!eval_out.empty()) out = eval_out;
      const MetricsReport r = cmd_eval(eval_pred, eval_gt, eval_threshold, eval_samples, eval_seed, out);
      if (as_json) {
        std::cout << to_json(r) << '\n';
      } else {
        std::cout << "chamfer_l1 " << r.chamfer_l1_m << " m\naccuracy   " << r.accuracy_m << " m\ncompleteness "
                  << r.completeness_m << " m\nprecision  " << r.precision_pct << " %\nrecall     " << r.recall_pct
                  << " %\nfscore     " << r.fscore_pct << " %\n(threshold " << eval_threshold << " m, seed " << eval_seed
                  << ")\n";
      }
    } else if (*exp) {
      const std::size_t n = cmd_export(export_in, export_out,
                                       export_observed ? io::CsvSelection::Observed : io::CsvSelection::OccupiedOnly,
                                       export_format == "pcd" ? ExportFormat::Pcd : ExportFormat::Csv);
      if (as_json) {
        std::cout << json{{"out", export_out}, {"voxels", n}}.dump() << '\n';
      } else {
        std::cout << "wrote " << n << " voxels to " << export_out << '\n';
      }
    } else if (*bench) {
      RunConfig c = bench_cfg.load();
      std::vector<ScanFrame> frames;
      std::vector<std::string> warnings;
      if (!c.paths.scans.empty()) {
        c.validate(true);
        std::optional<Pose> prev;
        for (const ScanEntry& e : list_scans(c, &warnings)) {
          frames.push_back(load_frame(e, prev ? prev : std::optional<Pose>(e.pose)));
          prev = e.pose;
          if (static_cast<int>(frames.size()) == bench_frames) break;
        }
      } else {
        synthetic::BenchScene scene = synthetic::bench_scene(bench_points, bench_frames);
        if (!c.grid.bounds_min) c.grid.bounds_min = scene.bounds_min;
        if (!c.grid.bounds_max) c.grid.bounds_max = scene.bounds_max;
        frames = std::move(scene.frames);
      }
      BenchResult r = cmd_bench(c, bench_sizes, bench_repeats, frames);
      warnings.insert(warnings.end(), r.warnings.begin(), r.warnings.end());
      print_warnings(warnings);
      const std::string table = bench_csv(r);
      if (!bench_csv_path.empty()) {
        std::ofstream os(bench_csv_path, std::ios::trunc);
        os << table;
        if (!os) fail(ErrorKind::Io, "failed writing '" + bench_csv_path + "'");
      }
      if (as_json) {
        json rows = json::array();
        for (const BenchRow& row : r.rows) {
          rows.push_back({{"voxel_size", row.voxel_size},
                          {"dims", {row.dims.x, row.dims.y, row.dims.z}},
                          {"memory_bytes", row.memory_bytes},
                          {"points_per_frame", row.points_per_frame},
                          {"samples_ms", row.samples_ms},
                          {"mean_ms", row.mean_ms},
                          {"std_ms", row.std_ms}});
        }
        std::cout << json{{"rows", rows}, {"max_min_ratio", r.max_min_ratio}}.dump() << '\n';
      } else {
        std::cout << table << "max/min mean latency ratio: " << r.max_min_ratio << '\n';
      }
    } else if (*info) {
      const GridInfo g = cmd_info(info_in);
      if (as_json) {
        std::cout << to_json(g) << '\n';
      } else {
        std::cout << "dims " << g.dims.x << " x " << g.dims.y << " x " << g.dims.z << ", voxel " << g.voxel_size
                  << " m, origin (" << g.origin.x() << ", " << g.origin.y() << ", " << g.origin.z() << ")\n"
                  << "memory " << g.memory_bytes << " bytes, observed " << g.observed << ", occupied " << g.occupied
                  << ", hit_max " << g.hit_max << ", threshold " << g.threshold << '\n';
      }
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUnknown;
  }
  return kOk;
}
