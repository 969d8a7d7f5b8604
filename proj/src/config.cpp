#include "dbtsdf/config.hpp"

#include "dbtsdf/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace dbtsdf {

using nlohmann::ordered_json;

namespace {

const char* model_name(ShadowModel m) { return m == ShadowModel::Hemisphere ? "hemisphere" : "cone"; }

ShadowModel parse_model(const std::string& s) {
  if (s == "hemisphere") return ShadowModel::Hemisphere;
  if (s == "cone") return ShadowModel::Cone;
  fail(ErrorKind::Config, "shadow_model must be 'hemisphere' or 'cone', got '" + s + "'");
}

const char* compensation_name(CompensationMode m) {
  switch (m) {
    case CompensationMode::None: return "none";
    case CompensationMode::YawOnly: return "yaw";
    case CompensationMode::FullSE3: return "se3";
  }
  return "none";
}

CompensationMode parse_compensation(const std::string& s) {
  if (s == "none") return CompensationMode::None;
  if (s == "yaw") return CompensationMode::YawOnly;
  if (s == "se3") return CompensationMode::FullSE3;
  fail(ErrorKind::Config, "compensation must be 'none', 'yaw' or 'se3', got '" + s + "'");
}

ordered_json vec_json(const Vec3& v) { return ordered_json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const ordered_json& j, const char* key) {
  if (!j.is_array() || j.size() != 3) fail(ErrorKind::Config, std::string(key) + " must be a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

ordered_json to_json_value(const RunConfig& c) {
  ordered_json j;
  auto& g = j["grid"];
  g["dims"] = c.grid.dims ? ordered_json::array({c.grid.dims->x, c.grid.dims->y, c.grid.dims->z}) : ordered_json();
  g["bounds_min"] = c.grid.bounds_min ? vec_json(*c.grid.bounds_min) : ordered_json();
  g["bounds_max"] = c.grid.bounds_max ? vec_json(*c.grid.bounds_max) : ordered_json();
  g["voxel_size"] = c.grid.voxel_size;
  g["origin"] = vec_json(c.grid.origin);
  g["max_memory_bytes"] = c.grid.max_memory_bytes;
  auto& k = j["kernel"];
  k["size"] = c.kernel.size;
  k["bins_azimuth"] = c.kernel.bins_azimuth;
  k["bins_elevation"] = c.kernel.bins_elevation;
  k["shadow_radius"] = c.kernel.shadow_radius ? ordered_json(*c.kernel.shadow_radius) : ordered_json();
  k["shadow_model"] = model_name(c.kernel.shadow_model);
  k["cone_half_angle_deg"] = c.kernel.cone_half_angle_deg;
  auto& i = j["integration"];
  i["hit_max"] = c.integration.hit_max;
  i["threshold"] = c.integration.threshold;
  i["compensation"] = compensation_name(c.integration.compensation);
  i["downsample"] = c.integration.downsample;
  i["first_return_per_voxel"] = c.integration.first_return_per_voxel;
  i["max_time_gap"] = c.integration.max_time_gap;
  j["threads"] = c.threads;
  auto& p = j["paths"];
  p["scans"] = c.paths.scans.string();
  p["trajectory"] = c.paths.trajectory.string();
  p["output"] = c.paths.output.string();
  return j;
}

RunConfig from_json_value(const ordered_json& j) {
  const RunConfig defaults;
  const ordered_json base = to_json_value(defaults);
  if (!j.is_object()) fail(ErrorKind::Config, "config must be a JSON object");
  for (const auto& [section, value] : j.items()) {
    if (!base.contains(section)) fail(ErrorKind::Config, "unknown config key '" + section + "'");
    if (value.is_object()) {
      for (const auto& [key, unused] : value.items()) {
        if (!base[section].is_object() || !base[section].contains(key)) {
          fail(ErrorKind::Config, "unknown config key '" + section + "." + key + "'");
        }
      }
    }
  }
  ordered_json m = base;
  m.merge_patch(j);
  // merge_patch drops null leaves; restore them as "unset".
  for (const char* s : {"grid", "kernel"}) {
    for (const auto& [key, v] : base[s].items()) {
      if (!m[s].contains(key)) m[s][key] = nullptr;
    }
  }

  RunConfig c;
  try {
    const auto& g = m["grid"];
    if (!g["dims"].is_null()) {
      const auto& d = g["dims"];
      if (!d.is_array() || d.size() != 3) fail(ErrorKind::Config, "grid.dims must be a 3-element array");
      c.grid.dims = Dims{d[0].get<int>(), d[1].get<int>(), d[2].get<int>()};
    }
    if (!g["bounds_min"].is_null()) c.grid.bounds_min = vec_from(g["bounds_min"], "grid.bounds_min");
    if (!g["bounds_max"].is_null()) c.grid.bounds_max = vec_from(g["bounds_max"], "grid.bounds_max");
    c.grid.voxel_size = g["voxel_size"].get<double>();
    c.grid.origin = vec_from(g["origin"], "grid.origin");
    c.grid.max_memory_bytes = g["max_memory_bytes"].get<std::size_t>();
    const auto& k = m["kernel"];
    c.kernel.size = k["size"].get<int>();
    c.kernel.bins_azimuth = k["bins_azimuth"].get<int>();
    c.kernel.bins_elevation = k["bins_elevation"].get<int>();
    if (!k["shadow_radius"].is_null()) c.kernel.shadow_radius = k["shadow_radius"].get<int>();
    c.kernel.shadow_model = parse_model(k["shadow_model"].get<std::string>());
    c.kernel.cone_half_angle_deg = k["cone_half_angle_deg"].get<double>();
    const auto& i = m["integration"];
    c.integration.hit_max = i["hit_max"].get<int>();
    c.integration.threshold = i["threshold"].get<int>();
    c.integration.compensation = parse_compensation(i["compensation"].get<std::string>());
    c.integration.downsample = i["downsample"].get<int>();
    c.integration.first_return_per_voxel = i["first_return_per_voxel"].get<bool>();
    c.integration.max_time_gap = i["max_time_gap"].get<double>();
    c.threads = m["threads"].get<int>();
    const auto& p = m["paths"];
    c.paths.scans = p["scans"].get<std::string>();
    c.paths.trajectory = p["trajectory"].get<std::string>();
    c.paths.output = p["output"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Config, std::string("config value has the wrong type: ") + e.what());
  }
  return c;
}

}  // namespace

void RunConfig::resolve() {
  if (!grid.dims) {
    if (!grid.bounds_min || !grid.bounds_max) {
      fail(ErrorKind::Config, "grid needs either dims or bounds_min/bounds_max");
    }
    grid.dims = dims_for_bounds(*grid.bounds_min, *grid.bounds_max, grid.voxel_size);
    grid.origin = *grid.bounds_min;
  }
  if (!kernel.shadow_radius) kernel.shadow_radius = default_shadow_radius(grid.voxel_size, kernel.size);
}

Dims RunConfig::resolved_dims() const {
  if (grid.dims) return *grid.dims;
  if (!grid.bounds_min || !grid.bounds_max) fail(ErrorKind::Config, "grid needs either dims or bounds_min/bounds_max");
  return dims_for_bounds(*grid.bounds_min, *grid.bounds_max, grid.voxel_size);
}

void RunConfig::validate(bool check_paths) const {
  if (!(grid.voxel_size > 0.0)) fail(ErrorKind::Config, "grid.voxel_size must be positive");
  const Dims d = resolved_dims();
  if (d.x < 1 || d.y < 1 || d.z < 1) fail(ErrorKind::Config, "grid dimensions must be >= 1");
  if (integration.hit_max < 1 || integration.hit_max > 255) fail(ErrorKind::Config, "integration.hit_max must be in [1,255]");
  if (integration.threshold < 1 || integration.threshold > integration.hit_max) {
    fail(ErrorKind::Config, "integration.threshold must be in [1, hit_max]");
  }
  if (integration.downsample < 1) fail(ErrorKind::Config, "integration.downsample must be >= 1");
  if (!(integration.max_time_gap >= 0.0)) fail(ErrorKind::Config, "integration.max_time_gap must be >= 0");
  if (threads < 0) fail(ErrorKind::Config, "threads must be >= 0");
  if (kernel.size < 1 || kernel.size % 2 == 0) fail(ErrorKind::Config, "kernel.size must be odd");
  if (kernel.shadow_radius && (*kernel.shadow_radius < 0 || *kernel.shadow_radius > kernel.size / 2)) {
    fail(ErrorKind::Config, "kernel.shadow_radius must be in [0, size/2]");
  }
  if (check_paths) {
    if (paths.scans.empty() || !std::filesystem::is_directory(paths.scans)) {
      fail(ErrorKind::Config, "scans directory '" + paths.scans.string() + "' does not exist");
    }
    if (paths.trajectory.empty() || !std::filesystem::is_regular_file(paths.trajectory)) {
      fail(ErrorKind::Config, "trajectory file '" + paths.trajectory.string() + "' does not exist");
    }
  }
}

KernelParams RunConfig::kernel_params() const {
  KernelParams k;
  k.size = kernel.size;
  k.bins_azimuth = kernel.bins_azimuth;
  k.bins_elevation = kernel.bins_elevation;
  k.shadow_radius = kernel.shadow_radius.value_or(default_shadow_radius(grid.voxel_size, kernel.size));
  k.shadow_model = kernel.shadow_model;
  k.cone_half_angle_deg = kernel.cone_half_angle_deg;
  return k;
}

IntegrationParams RunConfig::integration_params() const {
  IntegrationParams p;
  p.hit_max = static_cast<std::uint8_t>(integration.hit_max);
  p.threshold = static_cast<std::uint8_t>(integration.threshold);
  p.compensation = integration.compensation;
  p.downsample = integration.downsample;
  p.first_return_per_voxel = integration.first_return_per_voxel;
  p.threads = threads;
  return p;
}

RunConfig config_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
  }
  return from_json_value(j);
}

std::string config_to_json(const RunConfig& config) { return to_json_value(config).dump(2) + "\n"; }

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::Config, "cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return config_from_json(ss.str());
}

void save_config(const RunConfig& config, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  os << config_to_json(config);
  if (!os) fail(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

void apply_override(RunConfig& config, const std::string& key, const std::string& value) {
  ordered_json j = to_json_value(config);
  const auto dot = key.find('.');
  const std::string section = key.substr(0, dot);
  if (!j.contains(section) || (dot != std::string::npos) != j[section].is_object() ||
      (dot != std::string::npos && !j[section].contains(key.substr(dot + 1)))) {
    fail(ErrorKind::Config, "unknown config key '" + key + "'");
  }
  ordered_json parsed;
  try {
    parsed = ordered_json::parse(value);
  } catch (const nlohmann::json::parse_error&) {
    parsed = value;
  }
  // A string-valued key keeps the raw text, so a path like "2024" stays a path.
  const ordered_json& current = dot == std::string::npos ? j[section] : j[section][key.substr(dot + 1)];
  if (current.is_string() && !parsed.is_string()) parsed = value;
  if (dot == std::string::npos) {
    j[section] = parsed;
  } else {
    j[section][key.substr(dot + 1)] = parsed;
  }
  // An explicit null unsets an optional key.
  config = from_json_value(j);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    const ordered_json j = to_json_value(RunConfig{});
    for (const auto& [section, value] : j.items()) {
      if (value.is_object()) {
        for (const auto& [key, unused] : value.items()) out.push_back(section + "." + key);
      } else {
        out.push_back(section);
      }
    }
    return out;
  }();
  return keys;
}

}  // namespace dbtsdf
