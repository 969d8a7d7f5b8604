#include "commands.hpp"

#include "dbtsdf/error.hpp"
#include "dbtsdf/kernels.hpp"
#include "dbtsdf/mesher.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace dbtsdf::cli {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return kConfig;
    case ErrorKind::Format: return kFormat;
    case ErrorKind::Corruption: return kCorruption;
    case ErrorKind::Evaluation: return kEvaluation;
    case ErrorKind::Io: return kIo;
    case ErrorKind::Resource: return kResource;
    case ErrorKind::InvalidDirection:
    case ErrorKind::Contract: return kUnknown;
  }
  return kUnknown;
}

namespace {

bool is_scan_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".pcd" || ext == ".ply" || ext == ".xyz" || ext == ".txt";
}

std::optional<double> stem_timestamp(const fs::path& p) {
  const std::string stem = p.stem().string();
  double t = 0.0;
  auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), t);
  if (ec != std::errc() || ptr != stem.data() + stem.size() || !std::isfinite(t)) return std::nullopt;
  return t;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

std::string lower_ext(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

// Mesh files are sampled; point files and face-less PLY are used as-is.
PointSet load_points_for_eval(const fs::path& path, std::size_t samples, std::uint64_t seed) {
  const std::string ext = lower_ext(path);
  if (ext == ".obj" || ext == ".ply") {
    const TriangleMesh mesh = io::read_mesh(path);
    if (!mesh.triangles.empty()) return sample_mesh(mesh, samples, seed);
    return mesh.vertices;
  }
  return io::read_scan(path).points;
}

}  // namespace

std::vector<ScanEntry> list_scans(const RunConfig& config, std::vector<std::string>* warnings) {
  const io::Trajectory traj = io::read_trajectory(config.paths.trajectory);
  if (traj.empty()) fail(ErrorKind::Config, "trajectory '" + config.paths.trajectory.string() + "' has no poses");

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(config.paths.scans)) {
    if (e.is_regular_file() && is_scan_file(e.path())) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  const bool timestamped =
      !files.empty() && std::all_of(files.begin(), files.end(), [](const fs::path& p) { return stem_timestamp(p).has_value(); });
  std::vector<ScanEntry> out;
  if (timestamped) {
    for (const fs::path& f : files) out.push_back({f, *stem_timestamp(f), {}});
    std::stable_sort(out.begin(), out.end(), [](const ScanEntry& a, const ScanEntry& b) { return a.timestamp < b.timestamp; });
    std::vector<ScanEntry> matched;
    for (ScanEntry& e : out) {
      const auto hi = std::lower_bound(traj.begin(), traj.end(), e.timestamp,
                                       [](const io::TrajectoryRecord& r, double t) { return r.timestamp < t; });
      double gap = std::numeric_limits<double>::infinity();
      if (hi != traj.end()) gap = std::min(gap, hi->timestamp - e.timestamp);
      if (hi != traj.begin()) gap = std::min(gap, e.timestamp - std::prev(hi)->timestamp);
      if (gap > config.integration.max_time_gap) {
        if (warnings) {
          warnings->push_back("skipping " + e.path.filename().string() + ": no pose within " +
                              std::to_string(config.integration.max_time_gap) + " s");
        }
        continue;
      }
      e.pose = io::lookup_pose(traj, e.timestamp);
      matched.push_back(e);
    }
    return matched;
  }
  if (files.size() != traj.size()) {
    fail(ErrorKind::Config, "scan file names are not timestamps and their count (" + std::to_string(files.size()) +
                                ") differs from the trajectory length (" + std::to_string(traj.size()) + ")");
  }
  for (std::size_t i = 0; i < files.size(); ++i) out.push_back({files[i], traj[i].timestamp, traj[i].pose});
  return out;
}

ScanFrame load_frame(const ScanEntry& entry, const std::optional<Pose>& prev_pose) {
  io::ScanData data = io::read_scan(entry.path);
  ScanFrame frame;
  frame.points = std::move(data.points);
  frame.pose = entry.pose;
  frame.prev_pose = prev_pose;
  if (!data.times.empty()) {
    const auto [lo, hi] = std::minmax_element(data.times.begin(), data.times.end());
    const double range = *hi - *lo;
    if (range > 0.0) {
      frame.times.reserve(data.times.size());
      for (double t : data.times) frame.times.push_back((t - *lo) / range);
    }
  }
  return frame;
}

FuseResult cmd_fuse(RunConfig config) {
  config.validate(true);
  config.resolve();
  config.paths.scans = fs::absolute(config.paths.scans);
  config.paths.trajectory = fs::absolute(config.paths.trajectory);
  if (config.paths.output.empty()) fail(ErrorKind::Config, "paths.output is required");
  config.paths.output = fs::absolute(config.paths.output);
  std::error_code ec;
  fs::create_directories(config.paths.output, ec);
  if (ec) fail(ErrorKind::Io, "cannot create output directory '" + config.paths.output.string() + "': " + ec.message());

  FuseResult result;
  result.resolved_config = config.paths.output / "config.resolved.json";
  result.snapshot = config.paths.output / "map.dbtsdf";
  result.stats_log = config.paths.output / "frames.csv";
  save_config(config, result.resolved_config);

  VoxelGrid grid(*config.grid.dims, config.grid.voxel_size, config.grid.origin, config.grid.max_memory_bytes);
  const KernelBank bank(config.kernel_params());
  const IntegrationParams params = config.integration_params();
  params.validate();
  grid.hit_max = params.hit_max;
  grid.threshold = params.threshold;

  const std::vector<ScanEntry> entries = list_scans(config, &result.warnings);
  std::ofstream log(result.stats_log, std::ios::trunc);
  if (!log) fail(ErrorKind::Io, "cannot open '" + result.stats_log.string() + "' for writing");
  log << "frame,timestamp,file,points,discarded,merged,voxels_written,ms\n";

  std::optional<Pose> prev;
  char buf[64];
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const ScanFrame frame = load_frame(entries[i], prev ? prev : std::optional<Pose>(entries[i].pose));
    const FrameStats stats = integrate_frame(grid, bank, frame, params);
    prev = entries[i].pose;
    result.frames.push_back(stats);
    std::snprintf(buf, sizeof(buf), "%.9f", entries[i].timestamp);
    log << i << ',' << buf << ',' << entries[i].path.filename().string() << ',' << stats.points_in << ','
        << stats.points_discarded << ',' << stats.points_merged << ',' << stats.voxels_written << ','
        << stats.elapsed_ms << '\n';
  }
  if (!log) fail(ErrorKind::Io, "failed writing '" + result.stats_log.string() + "'");
  result.skipped_scans = result.warnings.size();
  io::save_grid(grid, result.snapshot);
  return result;
}

MeshSummary cmd_mesh(const fs::path& snapshot, const fs::path& out, io::MeshFormat format, bool normals) {
  const VoxelGrid grid = io::load_grid(snapshot);
  TriangleMesh mesh = extract_mesh(grid, 0.0);
  if (normals) compute_vertex_normals(mesh);
  io::write_mesh(mesh, out, format);
  return {mesh.vertices.size(), mesh.triangles.size()};
}

MetricsReport cmd_eval(const fs::path& pred, const fs::path& gt, double threshold, std::size_t samples,
                       std::uint64_t seed, const std::optional<fs::path>& out_json) {
  const PointSet pred_points = load_points_for_eval(pred, samples, seed);
  const PointSet gt_points = load_points_for_eval(gt, samples, seed + 1);
  const MetricsReport report = evaluate(pred_points, gt_points, threshold);
  if (out_json) {
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(to_json(report));
    j["samples"] = samples;
    j["seed"] = seed;
    std::ofstream os(*out_json, std::ios::trunc);
    if (!os) fail(ErrorKind::Io, "cannot open '" + out_json->string() + "' for writing");
    os << j.dump(2) << '\n';
    if (!os) fail(ErrorKind::Io, "failed writing '" + out_json->string() + "'");
  }
  return report;
}

std::size_t cmd_export(const fs::path& snapshot, const fs::path& out, io::CsvSelection include, ExportFormat format) {
  const VoxelGrid grid = io::load_grid(snapshot);
  if (format == ExportFormat::Csv) return io::export_grid_csv(grid, out, include);
  PointSet points;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Voxel& v = grid.cells()[i];
    if (!v.observed()) continue;
    if (include == io::CsvSelection::OccupiedOnly && v.sign != Sign::Occupied) continue;
    points.push_back(grid.voxel_center(grid.unravel(i)));
  }
  io::write_scan(points, out, io::ScanFormat::PcdBinary);
  return points.size();
}

BenchResult cmd_bench(const RunConfig& config, const std::vector<double>& voxel_sizes, int repeats,
                      const std::vector<ScanFrame>& frames) {
  if (!config.grid.bounds_min || !config.grid.bounds_max) {
    fail(ErrorKind::Config, "bench needs grid.bounds_min and grid.bounds_max so every size covers the same extent");
  }
  if (voxel_sizes.empty()) fail(ErrorKind::Config, "bench needs at least one voxel size");
  if (frames.empty()) fail(ErrorKind::Config, "bench needs at least one frame");
  BenchResult result;
  if (repeats < 2) result.warnings.push_back("fewer than 2 repeats; standard deviation is reported as 0");
  repeats = std::max(repeats, 1);

  struct Setup {
    KernelBank bank;
    IntegrationParams params;
    RunConfig config;
  };
  std::vector<Setup> setups;
  for (double size : voxel_sizes) {
    RunConfig c = config;
    c.grid.voxel_size = size;
    c.grid.dims.reset();
    c.validate(false);
    c.resolve();
    setups.push_back({KernelBank(c.kernel_params()), c.integration_params(), c});
    BenchRow row;
    row.voxel_size = size;
    row.dims = *c.grid.dims;
    row.points_per_frame = frames.front().points.size();
    result.rows.push_back(row);
  }
  // Repeats are interleaved across sizes so slow drift in machine load
  // spreads over every size instead of biasing one.
  for (int r = 0; r < repeats; ++r) {
    for (std::size_t s = 0; s < setups.size(); ++s) {
      const Setup& su = setups[s];
      BenchRow& row = result.rows[s];
      VoxelGrid grid(row.dims, row.voxel_size, su.config.grid.origin, su.config.grid.max_memory_bytes);
      row.memory_bytes = grid.memory_bytes();
      std::vector<double> latencies;
      for (const ScanFrame& f : frames) latencies.push_back(integrate_frame(grid, su.bank, f, su.params).elapsed_ms);
      row.samples_ms.push_back(mean_of(latencies));
    }
  }
  for (BenchRow& row : result.rows) {
    row.mean_ms = mean_of(row.samples_ms);
    row.std_ms = sample_std(row.samples_ms);
  }
  const auto [lo, hi] = std::minmax_element(result.rows.begin(), result.rows.end(),
                                            [](const BenchRow& a, const BenchRow& b) { return a.mean_ms < b.mean_ms; });
  result.max_min_ratio = lo->mean_ms > 0.0 ? hi->mean_ms / lo->mean_ms : 0.0;
  return result;
}

std::string bench_csv(const BenchResult& result) {
  std::ostringstream os;
  os << "voxel_size,nx,ny,nz,memory_bytes,points_per_frame,repeats,mean_ms,std_ms\n";
  for (const BenchRow& r : result.rows) {
    os << r.voxel_size << ',' << r.dims.x << ',' << r.dims.y << ',' << r.dims.z << ',' << r.memory_bytes << ','
       << r.points_per_frame << ',' << r.samples_ms.size() << ',' << r.mean_ms << ',' << r.std_ms << '\n';
  }
  return os.str();
}

GridInfo cmd_info(const fs::path& snapshot) {
  const VoxelGrid grid = io::load_grid(snapshot);
  GridInfo info;
  info.dims = grid.dims();
  info.voxel_size = grid.voxel_size();
  info.origin = grid.origin();
  info.memory_bytes = grid.memory_bytes();
  info.hit_max = grid.hit_max;
  info.threshold = grid.threshold;
  for (const Voxel& v : grid.cells()) {
    if (v.observed()) ++info.observed;
    if (v.sign == Sign::Occupied) ++info.occupied;
  }
  return info;
}

std::string to_json(const GridInfo& info) {
  nlohmann::ordered_json j;
  j["dims"] = {info.dims.x, info.dims.y, info.dims.z};
  j["voxel_size"] = info.voxel_size;
  j["origin"] = {info.origin.x(), info.origin.y(), info.origin.z()};
  j["memory_bytes"] = info.memory_bytes;
  j["observed_voxels"] = info.observed;
  j["occupied_voxels"] = info.occupied;
  j["hit_max"] = info.hit_max;
  j["threshold"] = info.threshold;
  return j.dump();
}

}  // namespace dbtsdf::cli
