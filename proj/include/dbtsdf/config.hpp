#pragma once

#include "dbtsdf/grid.hpp"
#include "dbtsdf/integrator.hpp"
#include "dbtsdf/kernels.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dbtsdf {

/// Everything a run needs. Loaded from a JSON file; each leaf key can be
/// overridden on the command line as --section.key.
struct RunConfig {
  struct Grid {
    std::optional<Dims> dims;
    std::optional<Vec3> bounds_min, bounds_max;
    double voxel_size = 0.1;
    Vec3 origin = Vec3::Zero();
    std::size_t max_memory_bytes = kDefaultMemoryCap;
  } grid;

  struct Kernel {
    int size = 21;
    int bins_azimuth = 40;
    int bins_elevation = 40;
    std::optional<int> shadow_radius;  // voxel-size heuristic when unset
    ShadowModel shadow_model = ShadowModel::Hemisphere;
    double cone_half_angle_deg = 30.0;
  } kernel;

  struct Integration {
    int hit_max = 255;
    int threshold = 2;
    CompensationMode compensation = CompensationMode::None;
    int downsample = 1;
    bool first_return_per_voxel = false;
    double max_time_gap = 0.05;
  } integration;

  int threads = 0;

  struct Paths {
    std::filesystem::path scans;
    std::filesystem::path trajectory;
    std::filesystem::path output;
  } paths;

  /// Fills dims (from bounds), origin (from bounds_min) and shadow_radius.
  void resolve();
  /// Range checks; with `check_paths`, scans/trajectory must exist.
  void validate(bool check_paths) const;

  KernelParams kernel_params() const;
  IntegrationParams integration_params() const;
  Dims resolved_dims() const;
};

RunConfig config_from_json(const std::string& text);
std::string config_to_json(const RunConfig& config);
RunConfig load_config(const std::filesystem::path& path);
void save_config(const RunConfig& config, const std::filesystem::path& path);

/// Sets one dotted key (e.g. "grid.voxel_size") from a JSON literal or bare string.
void apply_override(RunConfig& config, const std::string& key, const std::string& value);

/// Leaf keys accepted by apply_override, in documentation order.
const std::vector<std::string>& config_keys();

}  // namespace dbtsdf
