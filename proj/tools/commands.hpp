#pragma once

#include "dbtsdf/config.hpp"
#include "dbtsdf/integrator.hpp"
#include "dbtsdf/io.hpp"
#include "dbtsdf/metrics.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dbtsdf::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
  kOk = 0,
  kUnknown = 1,
  kConfig = 2,
  kFormat = 3,
  kCorruption = 4,
  kEvaluation = 5,
  kIo = 6,
  kResource = 7,
  kUsage = 64,
};

int exit_code(ErrorKind kind);

/// A scan file paired with its pose.
struct ScanEntry {
  fs::path path;
  double timestamp = 0.0;
  Pose pose;
};

/// Lists scans in timestamp order and associates poses. Numeric file stems
/// are timestamps matched to the nearest trajectory record within
/// max_time_gap; otherwise scans and records pair up by index.
std::vector<ScanEntry> list_scans(const RunConfig& config, std::vector<std::string>* warnings = nullptr);

ScanFrame load_frame(const ScanEntry& entry, const std::optional<Pose>& prev_pose);

struct FuseResult {
  fs::path snapshot;
  fs::path stats_log;
  fs::path resolved_config;
  std::vector<FrameStats> frames;
  std::size_t skipped_scans = 0;
  std::vector<std::string> warnings;
};

/// Integrates every scan and writes map.dbtsdf, frames.csv and
/// config.resolved.json into paths.output.
FuseResult cmd_fuse(RunConfig config);

struct MeshSummary {
  std::size_t vertices = 0;
  std::size_t triangles = 0;
};
MeshSummary cmd_mesh(const fs::path& snapshot, const fs::path& out, io::MeshFormat format, bool normals = true);

/// `pred` may be a mesh (sampled) or a point cloud; `gt` is a point cloud or mesh vertices.
MetricsReport cmd_eval(const fs::path& pred, const fs::path& gt, double threshold, std::size_t samples,
                       std::uint64_t seed, const std::optional<fs::path>& out_json);

enum class ExportFormat { Csv, Pcd };
std::size_t cmd_export(const fs::path& snapshot, const fs::path& out, io::CsvSelection include, ExportFormat format);

struct BenchRow {
  double voxel_size = 0.0;
  Dims dims;
  std::size_t memory_bytes = 0;
  std::size_t points_per_frame = 0;
  std::vector<double> samples_ms;  // mean frame latency of each repeat
  double mean_ms = 0.0;
  double std_ms = 0.0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  double max_min_ratio = 0.0;
  std::vector<std::string> warnings;
};

/// Integrates the same frames into a fresh grid covering the configured
/// bounds at each voxel size and reports frame latency and grid memory.
BenchResult cmd_bench(const RunConfig& config, const std::vector<double>& voxel_sizes, int repeats,
                      const std::vector<ScanFrame>& frames);
std::string bench_csv(const BenchResult& result);

struct GridInfo {
  Dims dims;
  double voxel_size = 0.0;
  Vec3 origin = Vec3::Zero();
  std::size_t memory_bytes = 0;
  std::size_t observed = 0;
  std::size_t occupied = 0;
  int hit_max = 0;
  int threshold = 0;
};
GridInfo cmd_info(const fs::path& snapshot);
std::string to_json(const GridInfo& info);

}  // namespace dbtsdf::cli
