#pragma once

// Command implementations behind the `phaseforge` executable. Every command
// reads its inputs from files and writes its outputs atomically; errors are
// reported as a first line "error: <Code>: <detail>" and a nonzero exit code.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "phaseforge/compiler.hpp"
#include "phaseforge/config.hpp"
#include "phaseforge/density.hpp"
#include "phaseforge/device.hpp"
#include "phaseforge/error.hpp"
#include "phaseforge/io.hpp"
#include "phaseforge/simulator.hpp"
#include "phaseforge/svg.hpp"

namespace phaseforge::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfig = 2,
  kNonMonotoneLut = 3,
  kBudget = 4,
  kFileFormat = 5,
  kPipeline = 6,
};

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError: return kConfig;
    case ErrorCode::NonMonotoneLut: return kNonMonotoneLut;
    case ErrorCode::DeflectionBudgetExceeded:
    case ErrorCode::PhaseRangeExceeded: return kBudget;
    case ErrorCode::FileFormat: return kFileFormat;
    case ErrorCode::IoError: return kUsage;
    default: return kPipeline;
  }
}

inline int report_error(std::ostream& err, const Error& e) {
  err << "error: " << e.what() << "\n";
  return exit_code_for(e.code());
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    return report_error(err, e);
  } catch (const std::exception& e) {
    err << "error: Internal: " << e.what() << "\n";
    return kPipeline;
  }
}

inline std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline fs::path sidecar(const fs::path& path, const std::string& ext) {
  fs::path p = path;
  p.replace_extension(ext);
  return p;
}

inline PhaseImage load_phase_image(const fs::path& path) { return io::decode_pgm(io::read_file(path)); }
inline DeflectionLut load_lut(const fs::path& path) { return io::lut_from_csv(io::read_file(path)); }

// ---------------------------------------------------------------------------

inline int cmd_calibrate(const fs::path& config_path, const fs::path& out_lut, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioConfig cfg = load_config(config_path);
    const auto sweep = cfg.sweep();
    if (exceeds_nyquist(cfg.pslm, ramp_gradient(cfg.pslm, sweep.back()))) {
      err << "warning: sweep exceeds the Nyquist gradient; expect aliasing\n";
    }
    const DeflectionLut lut = simulate_calibration(cfg.pslm, sweep);
    io::write_file_atomic(out_lut, io::lut_to_csv(lut));
    const double max_angle = std::atan(lut.max_shift() / cfg.pslm.ref_plane_distance);
    out << "knots: " << lut.entries().size() << "\n";
    out << "budget_shift_m: [" << io::format_decimal(lut.min_shift()) << ", " << io::format_decimal(lut.max_shift())
        << "]\n";
    out << "budget_deflection_rad: " << io::format_decimal(max_angle) << " ("
        << io::format_decimal(100.0 * max_angle / cfg.pslm.nyquist_angle(), 4) << "% of Nyquist)\n";
    return int{kOk};
  });
}

inline nlohmann::json image_metadata(const PhaseImage& image, const ScenarioConfig& cfg) {
  return {{"format", "phaseforge-phase-image"},
          {"width", image.width},
          {"height", image.height},
          {"levels", image.levels},
          {"maxval", image.maxval()},
          {"model_hash", image.model_hash},
          {"pslm", pslm_to_json(cfg.pslm)},
          {"full_wave_phase_depth", cfg.pslm.full_wave()},
          {"wrap_mode", cfg.compile.wrap_mode == WrapMode::Wrap ? "wrap" : "strict"},
          {"wrap_counts", image.wrap_counts}};
}

inline int cmd_compile(const fs::path& config_path, const fs::path& lut_path, const fs::path& out_pgm,
                       fs::path out_plan, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioConfig cfg = load_config(config_path);
    const DeflectionLut lut = load_lut(lut_path);
    const CompileResult result = compile_phase_image(cfg.projector, cfg.surface, cfg.pslm, lut, cfg.compile.rows,
                                                     cfg.compile.wrap_mode);
    if (out_plan.empty()) out_plan = sidecar(out_pgm, ".plan.csv");
    io::write_file_atomic(out_pgm, io::encode_pgm(result.image));
    io::write_file_atomic(sidecar(out_pgm, ".json"), dump_json(image_metadata(result.image, cfg)));
    io::write_file_atomic(out_plan, io::plan_to_csv(result.targets, result.slopes));
    double max_defl = 0.0;
    for (double d : result.targets.deflection) max_defl = std::max(max_defl, std::abs(d));
    out << "phase_image: " << result.image.width << "x" << result.image.height << "\n";
    out << "max_deflection_rad: " << io::format_decimal(max_defl) << "\n";
    if (!cfg.pslm.full_wave()) err << "warning: phase depth is not 2*pi; wrapped ramps are not seamless\n";
    return int{kOk};
  });
}

inline nlohmann::json simulation_summary(const SimulationResult& r) {
  double max_target = 0.0;
  double max_achieved = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    max_target = std::max(max_target, std::abs(r.target_shift[i]));
    max_achieved = std::max(max_achieved, std::abs(r.achieved_shift[i]));
  }
  return {{"pixels", r.size()},
          {"cv_before", r.before.cv},
          {"cv_after", r.after.cv},
          {"mean_footprint_before_m", r.before.mean},
          {"mean_footprint_after_m", r.after.mean},
          {"max_abs_shift_error_m", r.after.max_abs_shift_error.value_or(0.0)},
          {"max_abs_shift_error_fraction_of_footprint", r.after.max_abs_shift_error.value_or(0.0) / r.after.mean},
          {"max_abs_target_shift_m", max_target},
          {"max_abs_achieved_shift_m", max_achieved}};
}

inline int cmd_simulate(const fs::path& config_path, const fs::path& pgm_path, const fs::path& out_csv,
                        std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioConfig cfg = load_config(config_path);
    const PhaseImage image = load_phase_image(pgm_path);
    const SimulationResult r = forward_simulate(cfg.projector, cfg.surface, cfg.pslm, image);
    const nlohmann::json summary = simulation_summary(r);
    io::write_file_atomic(out_csv, io::simulation_to_csv(r));
    io::write_file_atomic(sidecar(out_csv, ".json"), dump_json(summary));
    out << dump_json(summary);
    return int{kOk};
  });
}

inline int cmd_report(const fs::path& sim_csv, const fs::path& out_svg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const io::ShiftSeries s = io::shifts_from_simulation_csv(io::read_file(sim_csv));
    const std::string doc = svg::shift_plot(s.pixel, {"target shift", "#1f77b4", s.target_shift},
                                            {"achieved shift", "#d62728", s.achieved_shift});
    io::write_file_atomic(out_svg, doc);
    out << "report: " << s.pixel.size() << " pixels\n";
    return int{kOk};
  });
}

// ---------------------------------------------------------------------------
// Demo scenarios

inline nlohmann::json demo_config_json(const std::string& name) {
  const nlohmann::json pslm = {{"pitch_m", 3.74e-6}, {"wavelength_m", 532e-9}, {"phase_depth_rad", 2.0 * std::numbers::pi},
                               {"levels", 256},      {"gamma", 1.0},         {"block_size", 8},
                               {"ref_plane_distance_m", 1.0}};
  if (name == "bent-surface") {
    // Left half tilted away from the projector; the crease sits on the axis.
    return {{"projector", {{"origin", {0.0, 0.0}}, {"axis", {0.0, 1.0}}, {"h_fov_deg", 54.0}, {"n_cols", 240}}},
            {"surface", {{"vertices", {{-0.82, 1.22}, {0.0, 1.0}, {0.82, 1.0}}}}},
            {"pslm", pslm},
            {"compile", {{"rows", 32}, {"wrap_mode", "wrap"}, {"sweep_steps", 33}, {"sweep_max_drive", 102.0}}}};
  }
  if (name == "flat") {
    return {{"projector", {{"origin", {0.0, 0.0}}, {"axis", {0.0, 1.0}}, {"h_fov_deg", 54.0}, {"n_cols", 240}}},
            {"surface", {{"vertices", {{-0.82, 1.0}, {0.82, 1.0}}}}},
            {"pslm", pslm},
            {"compile", {{"rows", 32}, {"wrap_mode", "wrap"}, {"sweep_steps", 33}, {"sweep_max_drive", 102.0}}}};
  }
  throw Error(ErrorCode::ConfigError, "demo: unknown scenario '" + name + "' (expected bent-surface or flat)");
}

inline double uniformity_cv(const std::vector<double>& v) { return uniformity_metrics(v).cv; }

inline int cmd_demo(const std::string& name, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  nlohmann::json cfg_json;
  int status = guarded(err, [&] {
    cfg_json = demo_config_json(name);
    fs::create_directories(out_dir);
    io::write_file_atomic(out_dir / "config.json", dump_json(cfg_json));
    return int{kOk};
  });
  if (status != kOk) return status;

  const fs::path config = out_dir / "config.json";
  if ((status = cmd_calibrate(config, out_dir / "lut.csv", out, err)) != kOk) return status;
  if ((status = cmd_compile(config, out_dir / "lut.csv", out_dir / "phase.pgm", out_dir / "plan.csv", out, err)) != kOk)
    return status;
  if ((status = cmd_simulate(config, out_dir / "phase.pgm", out_dir / "sim.csv", out, err)) != kOk) return status;
  if ((status = cmd_report(out_dir / "sim.csv", out_dir / "report.svg", out, err)) != kOk) return status;

  return guarded(err, [&] {
    constexpr int kCellPx = 8;
    const ScenarioConfig cfg = load_config(config);
    const PhaseImage image = load_phase_image(out_dir / "phase.pgm");
    const auto before = checker_cells(cfg.projector, cfg.surface, cfg.pslm, nullptr, kCellPx);
    const auto after = checker_cells(cfg.projector, cfg.surface, cfg.pslm, &image, kCellPx);
    io::write_file_atomic(out_dir / "checker_before.csv", io::cells_to_csv(before, kCellPx));
    io::write_file_atomic(out_dir / "checker_after.csv", io::cells_to_csv(after, kCellPx));

    const TargetPlan plan =
        required_deflections(cfg.projector, cfg.surface, uniform_targets(cfg.projector, cfg.surface));
    double max_defl = 0.0;
    for (double d : plan.deflection) max_defl = std::max(max_defl, std::abs(d));
    const double budget_fraction = max_defl / cfg.pslm.nyquist_angle();

    const SimulationResult sim = forward_simulate(cfg.projector, cfg.surface, cfg.pslm, image);
    nlohmann::json summary = simulation_summary(sim);
    summary["scenario"] = name;
    summary["config"] = cfg_json;
    summary["checker_cell_px"] = kCellPx;
    summary["checker_cv_before"] = uniformity_cv(before);
    summary["checker_cv_after"] = uniformity_cv(after);
    summary["max_deflection_rad"] = max_defl;
    summary["nyquist_deflection_rad"] = cfg.pslm.nyquist_angle();
    summary["max_deflection_fraction_of_nyquist"] = budget_fraction;
    summary["within_80pct_nyquist"] = budget_fraction <= 0.8;
    summary["wrap_counts"] = nlohmann::json::parse(io::read_file(out_dir / "phase.json")).at("wrap_counts");
    io::write_file_atomic(out_dir / "summary.json", dump_json(summary));
    out << "demo " << name << ": cv_before " << io::format_decimal(sim.before.cv, 4) << ", cv_after "
        << io::format_decimal(sim.after.cv, 4) << "\n";
    return int{kOk};
  });
}

}  // namespace phaseforge::cli
