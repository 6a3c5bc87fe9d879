#pragma once

// TargetPlan -> device-ready phase image.
//
// Each projector pixel owns a block of `block_size` modulator pixels. The LUT
// turns the pixel's deflection into a drive increment, hence a phase slope
// pinned at the block center. The phase derivative is the continuous
// piecewise-linear interpolant of those slopes, integrated in closed form, so
// the unwrapped phase is C1 by construction. Wrapping and quantization happen
// only when sampling at modulator pixel centers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "phaseforge/density.hpp"
#include "phaseforge/device.hpp"
#include "phaseforge/error.hpp"
#include "phaseforge/geometry.hpp"

namespace phaseforge {

struct SlopePlan {
  int block_size = 0;
  double pitch = 0.0;
  std::vector<double> delta_drive;  // LUT-inverted increment per modulator pixel
  std::vector<double> slope;        // planned phase gradient g_i [rad/m]

  std::size_t size() const { return slope.size(); }
  double block_begin(std::size_t i) const { return static_cast<double>(i) * block_size * pitch; }
  double block_end(std::size_t i) const { return block_begin(i + 1); }
  double block_center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * block_size * pitch; }
  double width() const { return block_begin(size()); }
};

/// Unwrapped phase with a continuous piecewise-linear derivative.
class PhaseProfile {
 public:
  PhaseProfile() = default;

  PhaseProfile(std::vector<double> knots, std::vector<double> slopes, double width)
      : knots_(std::move(knots)), slopes_(std::move(slopes)), width_(width) {
    knot_phase_.resize(knots_.size());
    if (knots_.empty()) return;
    knot_phase_[0] = slopes_[0] * knots_[0];
    for (std::size_t i = 1; i < knots_.size(); ++i) {
      knot_phase_[i] = knot_phase_[i - 1] + 0.5 * (slopes_[i - 1] + slopes_[i]) * (knots_[i] - knots_[i - 1]);
    }
  }

  std::span<const double> knots() const { return knots_; }
  std::span<const double> slopes() const { return slopes_; }
  double width() const { return width_; }

  /// Index of the knot interval containing x: -1 before the first knot,
  /// size()-1 after the last.
  std::ptrdiff_t interval(double x) const {
    std::ptrdiff_t lo = -1;
    std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(knots_.size());
    while (hi - lo > 1) {
      const std::ptrdiff_t mid = (lo + hi) / 2;
      if (knots_[static_cast<std::size_t>(mid)] <= x) lo = mid; else hi = mid;
    }
    return lo;
  }

  double derivative(double x) const { return derivative_in(x, interval(x)); }
  double value(double x) const { return value_in(x, interval(x)); }

  double derivative_in(double x, std::ptrdiff_t j) const {
    if (knots_.empty()) return 0.0;
    if (j < 0) return slopes_.front();
    const auto u = static_cast<std::size_t>(j);
    if (u + 1 >= knots_.size()) return slopes_.back();
    const double w = (x - knots_[u]) / (knots_[u + 1] - knots_[u]);
    return slopes_[u] + w * (slopes_[u + 1] - slopes_[u]);
  }

  double value_in(double x, std::ptrdiff_t j) const {
    if (knots_.empty()) return 0.0;
    if (j < 0) return slopes_.front() * x;
    const auto u = static_cast<std::size_t>(j);
    const double dx = x - knots_[u];
    return knot_phase_[u] + 0.5 * (slopes_[u] + derivative_in(x, j)) * dx;
  }

 private:
  std::vector<double> knots_;
  std::vector<double> slopes_;
  std::vector<double> knot_phase_;
  double width_ = 0.0;
};

enum class WrapMode { Wrap, Strict };

struct PhaseImage {
  int width = 0;
  int height = 0;
  int levels = 256;
  std::vector<std::uint16_t> pixels;  // row-major drive levels
  std::vector<int> wrap_counts;       // per row
  std::string model_hash;

  int maxval() const { return levels - 1; }
  std::span<const std::uint16_t> row(int r) const {
    return {pixels.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(width),
            static_cast<std::size_t>(width)};
  }
};

struct CompileResult {
  PhaseImage image;
  TargetPlan targets;
  SlopePlan slopes;
};

/// FNV-1a over the model parameters, printed at full precision.
inline std::string model_fingerprint(const PslmModel& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.17g|%.17g|%.17g|%d|%.17g|%d|%.17g", m.pitch, m.wavelength, m.phase_depth,
                m.levels, m.gamma, m.block_size, m.ref_plane_distance);
  std::uint64_t h = 14695981039346656037ull;
  for (const char* c = buf; *c; ++c) {
    h ^= static_cast<unsigned char>(*c);
    h *= 1099511628211ull;
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

inline SlopePlan plan_slopes(const TargetPlan& targets, const DeflectionLut& lut, const PslmModel& model) {
  SlopePlan plan;
  plan.block_size = model.block_size;
  plan.pitch = model.pitch;
  const std::size_t n = targets.size();
  plan.delta_drive.resize(n);
  plan.slope.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double shift = std::tan(targets.deflection[i]) * model.ref_plane_distance;
    double dd = 0.0;
    try {
      dd = lut.invert(shift);
    } catch (const Error& e) {
      throw e.annotated("pixel " + std::to_string(i) + " (deflection " + std::to_string(targets.deflection[i]) +
                        " rad)");
    }
    const double g = ramp_gradient(model, dd);
    if (exceeds_nyquist(model, g)) {
      throw Error(ErrorCode::DeflectionBudgetExceeded,
                  "pixel " + std::to_string(i) + " slope " + std::to_string(g) + " rad/m exceeds the Nyquist gradient");
    }
    plan.delta_drive[i] = dd;
    plan.slope[i] = g;
  }
  return plan;
}

inline PhaseProfile assemble_c1_profile(const SlopePlan& plan, const PslmModel& /*model*/) {
  std::vector<double> knots(plan.size());
  for (std::size_t i = 0; i < plan.size(); ++i) knots[i] = plan.block_center(i);
  return PhaseProfile(std::move(knots), plan.slope, plan.width());
}

inline PhaseImage wrap_and_quantize(const PhaseProfile& profile, const PslmModel& model, int rows,
                                    WrapMode mode = WrapMode::Wrap) {
  if (rows < 1) throw Error(ErrorCode::OutOfRange, "rows must be >= 1");
  PhaseImage image;
  image.width = static_cast<int>(std::llround(profile.width() / model.pitch));
  image.height = rows;
  image.levels = model.levels;
  image.model_hash = model_fingerprint(model);

  const auto width = static_cast<std::size_t>(image.width);
  std::vector<std::uint16_t> line(width);
  const double depth = model.phase_depth;
  const double top = model.max_drive();
  int wraps = 0;
  double prev_period = 0.0;
  std::ptrdiff_t j = -1;
  const auto knots = profile.knots();
  for (std::size_t k = 0; k < width; ++k) {
    const double x = (static_cast<double>(k) + 0.5) * model.pitch;
    while (j + 1 < static_cast<std::ptrdiff_t>(knots.size()) && knots[static_cast<std::size_t>(j + 1)] <= x) ++j;
    const double phi = profile.value_in(x, j);
    const double period = std::floor(phi / depth);
    double wrapped = phi - period * depth;
    if (wrapped >= depth) wrapped = 0.0;  // guard against rounding at the period edge
    if (wrapped < 0.0) wrapped = 0.0;
    if (mode == WrapMode::Strict && (phi < 0.0 || phi > depth)) {
      throw Error(ErrorCode::PhaseRangeExceeded,
                  "pixel " + std::to_string(k) + " needs phase " + std::to_string(phi) + " rad outside [0, " +
                      std::to_string(depth) + "] in strict mode");
    }
    if (k > 0) wraps += static_cast<int>(std::abs(period - prev_period));
    prev_period = period;
    const double drive = mode == WrapMode::Strict ? drive_of_phase(model, std::clamp(phi, 0.0, depth))
                                                  : drive_of_phase(model, wrapped);
    line[k] = static_cast<std::uint16_t>(std::min(round_half_up(drive), top));
  }
  if (mode == WrapMode::Strict) wraps = 0;

  image.pixels.reserve(width * static_cast<std::size_t>(rows));
  for (int r = 0; r < rows; ++r) image.pixels.insert(image.pixels.end(), line.begin(), line.end());
  image.wrap_counts.assign(static_cast<std::size_t>(rows), wraps);
  return image;
}

namespace detail {
template <typename F>
auto run_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw e.annotated(std::string("stage ") + stage);
  }
}
}  // namespace detail

/// uniform_targets -> required_deflections -> plan_slopes -> assemble_c1_profile -> wrap_and_quantize.
inline CompileResult compile_phase_image(const ProjectorModel& proj, const SurfaceProfile& surface,
                                         const PslmModel& model, const DeflectionLut& lut, int rows,
                                         WrapMode mode = WrapMode::Wrap) {
  detail::run_stage("validate", [&] {
    proj.validate();
    model.validate();
  });
  CompileResult out;
  out.targets = detail::run_stage("uniform_targets", [&] { return uniform_targets(proj, surface); });
  out.targets = detail::run_stage("required_deflections",
                                  [&] { return required_deflections(proj, surface, std::move(out.targets)); });
  out.slopes = detail::run_stage("plan_slopes", [&] { return plan_slopes(out.targets, lut, model); });
  const PhaseProfile profile =
      detail::run_stage("assemble_c1_profile", [&] { return assemble_c1_profile(out.slopes, model); });
  out.image = detail::run_stage("wrap_and_quantize", [&] { return wrap_and_quantize(profile, model, rows, mode); });
  return out;
}

}  // namespace phaseforge
