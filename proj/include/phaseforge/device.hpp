#pragma once

// Phase-only modulator model: drive-level response, blazed-ramp deflection,
// and the emulated calibration sweep that produces the deflection LUT.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "phaseforge/error.hpp"

namespace phaseforge {

struct PslmModel {
  double pitch = 8e-6;                        // [m]
  double wavelength = 532e-9;                 // [m]
  double phase_depth = 2.0 * std::numbers::pi;  // phase at maximum drive [rad]
  int levels = 256;
  double gamma = 1.0;
  int block_size = 8;                         // modulator pixels per projector pixel column
  double ref_plane_distance = 1.0;            // calibration screen distance [m]

  void validate() const {
    if (!(pitch > 0.0)) throw Error(ErrorCode::InvalidModel, "pslm.pitch_m must be positive");
    if (!(wavelength > 0.0)) throw Error(ErrorCode::InvalidModel, "pslm.wavelength_m must be positive");
    if (!(ref_plane_distance > 0.0)) {
      throw Error(ErrorCode::InvalidModel, "pslm.ref_plane_distance_m must be positive");
    }
    if (levels < 2 || levels > 65536) throw Error(ErrorCode::InvalidModel, "pslm.levels must lie in [2, 65536]");
    if (!(phase_depth > 0.0)) throw Error(ErrorCode::InvalidModel, "pslm.phase_depth_rad must be positive");
    if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidModel, "pslm.gamma must be positive");
    if (block_size < 2) throw Error(ErrorCode::InvalidModel, "pslm.block_size must be >= 2");
    if (wavelength / (2.0 * pitch) > 1.0) {
      throw Error(ErrorCode::InvalidModel, "pslm.wavelength_m exceeds twice the pitch; no propagating deflection");
    }
  }

  double max_drive() const { return static_cast<double>(levels - 1); }
  /// Largest usable phase gradient: a two-pixel period.
  double nyquist_gradient() const { return std::numbers::pi / pitch; }
  double nyquist_angle() const { return std::asin(wavelength / (2.0 * pitch)); }
  bool full_wave() const { return std::abs(phase_depth - 2.0 * std::numbers::pi) < 1e-12; }
};

inline double phase_of_drive(const PslmModel& m, double drive) {
  if (!(drive >= 0.0 && drive <= m.max_drive())) {
    throw Error(ErrorCode::OutOfRange, "drive " + std::to_string(drive) + " outside [0, levels-1]");
  }
  return m.phase_depth * std::pow(drive / m.max_drive(), m.gamma);
}

inline double drive_of_phase(const PslmModel& m, double phase) {
  if (!(phase >= 0.0 && phase <= m.phase_depth)) {
    throw Error(ErrorCode::OutOfRange, "phase " + std::to_string(phase) + " outside [0, phase_depth]");
  }
  return m.max_drive() * std::pow(phase / m.phase_depth, 1.0 / m.gamma);
}

inline double round_half_up(double x) { return std::floor(x + 0.5); }

/// 1D unwrap: any step larger than period/2 in magnitude is folded by whole periods.
inline void unwrap_in_place(std::span<double> phase, double period) {
  double offset = 0.0;
  double prev_raw = phase.empty() ? 0.0 : phase[0];
  for (std::size_t k = 1; k < phase.size(); ++k) {
    const double raw = phase[k];
    double step = raw - prev_raw;
    while (step > 0.5 * period) {
      step -= period;
      offset -= period;
    }
    while (step < -0.5 * period) {
      step += period;
      offset += period;
    }
    prev_raw = raw;
    phase[k] = raw + offset;
  }
}

/// Blazed-grating relation sin(theta) = lambda * g / (2 pi) for a mean phase
/// gradient g [rad/m] at the modulator plane.
inline double ramp_deflection(const PslmModel& m, double gradient) {
  const double s = m.wavelength * gradient / (2.0 * std::numbers::pi);
  if (std::abs(s) > 1.0) {
    throw Error(ErrorCode::EvanescentDeflection, "gradient " + std::to_string(gradient) + " rad/m is evanescent");
  }
  return std::asin(s);
}

inline bool exceeds_nyquist(const PslmModel& m, double gradient) {
  return std::abs(gradient) > m.nyquist_gradient();
}

/// Mean phase slope [rad/m] of a ramp that advances `delta_drive` levels per
/// modulator pixel. Averaged over whole periods the response exponent cancels,
/// since each period spans exactly one phase depth.
inline double ramp_gradient(const PslmModel& m, double delta_drive) {
  return m.phase_depth * delta_drive / (m.max_drive() * m.pitch);
}

/// Drive-level increment whose ramp has mean gradient `gradient`.
inline double drive_step_of_gradient(const PslmModel& m, double gradient) {
  return gradient * m.max_drive() * m.pitch / m.phase_depth;
}

/// Spatially repeated ramp: drive_k = round((k * delta_drive) mod (levels - 1)).
inline std::vector<int> ramp_pattern(const PslmModel& m, double delta_drive, std::size_t width) {
  std::vector<int> drive(width);
  const double span = m.max_drive();
  for (std::size_t k = 0; k < width; ++k) {
    double r = std::fmod(static_cast<double>(k) * delta_drive, span);
    if (r < 0.0) r += span;
    drive[k] = static_cast<int>(std::min(round_half_up(r), span));
  }
  return drive;
}

inline constexpr std::size_t kCalibrationWindow = 4096;

/// Shift [m] a calibration screen at ref_plane_distance would record for the
/// repeated ramp with the given increment. The mean gradient is taken over the
/// unwrapped phase of the whole calibration window.
inline double calibration_shift(const PslmModel& m, double delta_drive,
                                std::size_t window = kCalibrationWindow) {
  if (delta_drive == 0.0) return 0.0;
  if (!(std::abs(delta_drive) <= m.max_drive())) {
    throw Error(ErrorCode::OutOfRange, "sweep value " + std::to_string(delta_drive) + " exceeds levels-1");
  }
  const std::vector<int> drive = ramp_pattern(m, delta_drive, window);
  std::vector<double> phase(drive.size());
  for (std::size_t k = 0; k < drive.size(); ++k) phase[k] = phase_of_drive(m, drive[k]);
  unwrap_in_place(phase, m.phase_depth);
  const double gradient = (phase.back() - phase.front()) / (static_cast<double>(window - 1) * m.pitch);
  return std::tan(ramp_deflection(m, gradient)) * m.ref_plane_distance;
}

struct LutEntry {
  double delta_drive = 0.0;
  double shift = 0.0;  // [m] at the reference plane
};

/// Monotone table from per-pixel drive increment to reference-plane shift.
class DeflectionLut {
 public:
  DeflectionLut() = default;

  explicit DeflectionLut(std::vector<LutEntry> entries) : entries_(std::move(entries)) {
    if (entries_.size() < 2) throw Error(ErrorCode::NonMonotoneLut, "LUT needs at least 2 entries");
    bool has_origin = false;
    for (std::size_t k = 0; k < entries_.size(); ++k) {
      if (entries_[k].delta_drive == 0.0 && entries_[k].shift == 0.0) has_origin = true;
      if (k == 0) continue;
      if (!(entries_[k].delta_drive > entries_[k - 1].delta_drive)) {
        throw Error(ErrorCode::NonMonotoneLut, "delta_drive not strictly increasing at entry " + std::to_string(k));
      }
      if (!(entries_[k].shift > entries_[k - 1].shift)) {
        throw Error(ErrorCode::NonMonotoneLut,
                    "shift not strictly increasing at entry " + std::to_string(k) + " (delta_drive " +
                        std::to_string(entries_[k].delta_drive) + "); sweep too fine for the level count");
      }
    }
    if (!has_origin) throw Error(ErrorCode::NonMonotoneLut, "LUT lacks the (0, 0) entry");
  }

  std::span<const LutEntry> entries() const { return entries_; }
  double min_shift() const { return entries_.front().shift; }
  double max_shift() const { return entries_.back().shift; }

  /// Piecewise-linear inverse (shift -> delta_drive). Never extrapolates.
  double invert(double desired_shift) const {
    if (!(desired_shift >= min_shift() && desired_shift <= max_shift())) {
      const double shortfall =
          desired_shift > max_shift() ? desired_shift - max_shift() : min_shift() - desired_shift;
      throw Error(ErrorCode::DeflectionBudgetExceeded,
                  "required shift " + std::to_string(desired_shift) + " m, available [" + std::to_string(min_shift()) +
                      ", " + std::to_string(max_shift()) + "] m, shortfall " + std::to_string(shortfall) + " m");
    }
    auto hi = std::lower_bound(entries_.begin(), entries_.end(), desired_shift,
                               [](const LutEntry& e, double v) { return e.shift < v; });
    if (hi->shift == desired_shift) return hi->delta_drive;
    auto lo = hi - 1;
    const double w = (desired_shift - lo->shift) / (hi->shift - lo->shift);
    return lo->delta_drive + w * (hi->delta_drive - lo->delta_drive);
  }

 private:
  std::vector<LutEntry> entries_;
};

inline double invert_lut(const DeflectionLut& lut, double desired_shift) { return lut.invert(desired_shift); }

/// `steps` values uniformly spanning [-max_drive, +max_drive]; an odd count includes 0.
inline std::vector<double> default_sweep(const PslmModel& m, int steps = 33, double max_drive = -1.0) {
  if (max_drive < 0.0) max_drive = m.max_drive() / 4.0;
  if (steps < 3 || steps % 2 == 0) throw Error(ErrorCode::InvalidModel, "compile.sweep_steps must be odd and >= 3");
  if (!(max_drive > 0.0)) throw Error(ErrorCode::InvalidModel, "compile.sweep_max_drive must be positive");
  std::vector<double> sweep(static_cast<std::size_t>(steps));
  const int half = steps / 2;
  for (int k = 0; k < steps; ++k) sweep[static_cast<std::size_t>(k)] = max_drive * (k - half) / half;
  sweep[static_cast<std::size_t>(half)] = 0.0;
  return sweep;
}

inline DeflectionLut simulate_calibration(const PslmModel& m, std::span<const double> sweep,
                                          std::size_t window = kCalibrationWindow) {
  if (!std::is_sorted(sweep.begin(), sweep.end())) throw Error(ErrorCode::InvalidModel, "sweep must be sorted");
  if (std::find(sweep.begin(), sweep.end(), 0.0) == sweep.end()) {
    throw Error(ErrorCode::InvalidModel, "sweep must include 0");
  }
  std::vector<LutEntry> entries;
  entries.reserve(sweep.size());
  for (double d : sweep) entries.push_back({d, calibration_shift(m, d, window)});
  return DeflectionLut(std::move(entries));
}

}  // namespace phaseforge
