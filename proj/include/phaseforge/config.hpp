#pragma once

// Scenario configuration: one JSON document, unknown keys rejected.

#include <cmath>
#include <filesystem>
#include <initializer_list>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "phaseforge/compiler.hpp"
#include "phaseforge/device.hpp"
#include "phaseforge/error.hpp"
#include "phaseforge/geometry.hpp"
#include "phaseforge/io.hpp"

namespace phaseforge {

struct CompileSettings {
  int rows = 1;
  WrapMode wrap_mode = WrapMode::Wrap;
  int sweep_steps = 33;
  double sweep_max_drive = -1.0;  // < 0: (levels - 1) / 4
};

struct ScenarioConfig {
  ProjectorModel projector;
  SurfaceProfile surface;
  PslmModel pslm;
  CompileSettings compile;

  double sweep_max_drive() const {
    return compile.sweep_max_drive < 0.0 ? pslm.max_drive() / 4.0 : compile.sweep_max_drive;
  }
  std::vector<double> sweep() const { return default_sweep(pslm, compile.sweep_steps, sweep_max_drive()); }
};

namespace config_detail {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ConfigError, field + ": " + what);
}

inline void reject_unknown(const json& obj, const std::string& path, std::initializer_list<std::string_view> known) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (auto k : known) ok = ok || it.key() == k;
    if (!ok) fail(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
  }
}

inline const json& member(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) fail(path + "." + key, "missing");
  return obj.at(key);
}

inline double number(const json& v, const std::string& field) {
  if (!v.is_number()) fail(field, "must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(field, "must be finite");
  return d;
}

inline int integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) fail(field, "must be an integer");
  const auto i = v.get<long long>();
  if (i < -2147483647LL || i > 2147483647LL) fail(field, "out of integer range");
  return static_cast<int>(i);
}

inline Vec2 point(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 2) fail(field, "must be a [x, z] pair");
  return {number(v[0], field + "[0]"), number(v[1], field + "[1]")};
}

template <typename T>
T optional(const json& obj, const std::string& path, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  const std::string field = path + "." + key;
  if constexpr (std::is_same_v<T, int>) {
    return integer(obj.at(key), field);
  } else {
    return number(obj.at(key), field);
  }
}

// Model invariant failures are reported against the config field named in the message.
template <typename F>
void revalidate(const std::string& field, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    const std::string& d = e.detail();
    const auto colon = d.find(' ');
    const bool prefixed = d.rfind("pslm.", 0) == 0 || d.rfind("projector.", 0) == 0 || d.rfind("compile.", 0) == 0;
    if (prefixed && colon != std::string::npos) fail(d.substr(0, colon), d.substr(colon + 1));
    fail(field, d);
  }
}

}  // namespace config_detail

inline ScenarioConfig parse_config(const nlohmann::json& root) {
  using namespace config_detail;
  reject_unknown(root, "", {"projector", "surface", "pslm", "compile"});
  ScenarioConfig cfg;

  const json& pj = member(root, "", "projector");
  reject_unknown(pj, "projector", {"origin", "axis", "h_fov_deg", "n_cols"});
  if (pj.contains("origin")) cfg.projector.origin = point(pj.at("origin"), "projector.origin");
  if (pj.contains("axis")) cfg.projector.axis = point(pj.at("axis"), "projector.axis");
  cfg.projector.h_fov = number(member(pj, "projector", "h_fov_deg"), "projector.h_fov_deg") * std::numbers::pi / 180.0;
  cfg.projector.n_cols = integer(member(pj, "projector", "n_cols"), "projector.n_cols");
  revalidate("projector", [&] { cfg.projector.validate(); });

  const json& sj = member(root, "", "surface");
  reject_unknown(sj, "surface", {"vertices"});
  const json& vj = member(sj, "surface", "vertices");
  if (!vj.is_array()) fail("surface.vertices", "must be an array of [x, z] pairs");
  std::vector<Vec2> vertices;
  for (std::size_t k = 0; k < vj.size(); ++k) vertices.push_back(point(vj[k], "surface.vertices[" + std::to_string(k) + "]"));
  revalidate("surface.vertices", [&] { cfg.surface = SurfaceProfile(std::move(vertices)); });

  const json& mj = member(root, "", "pslm");
  reject_unknown(mj, "pslm",
                 {"pitch_m", "wavelength_m", "phase_depth_rad", "levels", "gamma", "block_size", "ref_plane_distance_m"});
  cfg.pslm.pitch = number(member(mj, "pslm", "pitch_m"), "pslm.pitch_m");
  cfg.pslm.wavelength = number(member(mj, "pslm", "wavelength_m"), "pslm.wavelength_m");
  cfg.pslm.ref_plane_distance = optional(mj, "pslm", "ref_plane_distance_m", 1.0);
  cfg.pslm.phase_depth = optional(mj, "pslm", "phase_depth_rad", 2.0 * std::numbers::pi);
  cfg.pslm.levels = optional(mj, "pslm", "levels", 256);
  cfg.pslm.gamma = optional(mj, "pslm", "gamma", 1.0);
  cfg.pslm.block_size = optional(mj, "pslm", "block_size", 8);
  revalidate("pslm", [&] { cfg.pslm.validate(); });

  if (root.contains("compile")) {
    const json& cj = root.at("compile");
    reject_unknown(cj, "compile", {"rows", "wrap_mode", "sweep_steps", "sweep_max_drive"});
    cfg.compile.rows = optional(cj, "compile", "rows", 1);
    if (cfg.compile.rows < 1) fail("compile.rows", "must be >= 1");
    if (cj.contains("wrap_mode")) {
      const json& w = cj.at("wrap_mode");
      if (w == "wrap") {
        cfg.compile.wrap_mode = WrapMode::Wrap;
      } else if (w == "strict") {
        cfg.compile.wrap_mode = WrapMode::Strict;
      } else {
        fail("compile.wrap_mode", "must be \"wrap\" or \"strict\"");
      }
    }
    cfg.compile.sweep_steps = optional(cj, "compile", "sweep_steps", 33);
    cfg.compile.sweep_max_drive = optional(cj, "compile", "sweep_max_drive", -1.0);
    if (cj.contains("sweep_max_drive") &&
        !(cfg.compile.sweep_max_drive > 0.0 && cfg.compile.sweep_max_drive <= cfg.pslm.max_drive() / 2.0)) {
      fail("compile.sweep_max_drive", "must lie in (0, (levels-1)/2]");
    }
  }
  revalidate("compile", [&] { (void)cfg.sweep(); });

  revalidate("surface.vertices", [&] { validate_fan(cfg.projector, cfg.surface); });
  return cfg;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, "<root>: invalid JSON at byte " + std::to_string(e.byte));
  }
  return parse_config(root);
}

inline nlohmann::json pslm_to_json(const PslmModel& m) {
  return {{"pitch_m", m.pitch},
          {"wavelength_m", m.wavelength},
          {"phase_depth_rad", m.phase_depth},
          {"levels", m.levels},
          {"gamma", m.gamma},
          {"block_size", m.block_size},
          {"ref_plane_distance_m", m.ref_plane_distance}};
}

inline nlohmann::json config_to_json(const ScenarioConfig& cfg) {
  nlohmann::json vertices = nlohmann::json::array();
  for (Vec2 v : cfg.surface.vertices()) vertices.push_back({v.x, v.z});
  nlohmann::json compile = {{"rows", cfg.compile.rows},
                            {"wrap_mode", cfg.compile.wrap_mode == WrapMode::Wrap ? "wrap" : "strict"},
                            {"sweep_steps", cfg.compile.sweep_steps}};
  if (cfg.compile.sweep_max_drive >= 0.0) compile["sweep_max_drive"] = cfg.compile.sweep_max_drive;
  return {{"projector",
           {{"origin", {cfg.projector.origin.x, cfg.projector.origin.z}},
            {"axis", {cfg.projector.axis.x, cfg.projector.axis.z}},
            {"h_fov_deg", cfg.projector.h_fov * 180.0 / std::numbers::pi},
            {"n_cols", cfg.projector.n_cols}}},
          {"surface", {{"vertices", vertices}}},
          {"pslm", pslm_to_json(cfg.pslm)},
          {"compile", compile}};
}

}  // namespace phaseforge
