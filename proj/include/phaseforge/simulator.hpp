#pragma once

// Forward verification. Deflections are recovered from the stored drive
// levels alone (never from the slope plan), rays are re-traced, and achieved
// hits are compared against the uniform targets.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "phaseforge/compiler.hpp"
#include "phaseforge/density.hpp"
#include "phaseforge/device.hpp"
#include "phaseforge/error.hpp"
#include "phaseforge/geometry.hpp"
#include "phaseforge/parallel.hpp"

namespace phaseforge {

struct SimulationResult {
  std::vector<double> nominal_s;
  std::vector<double> target_s;
  std::vector<double> achieved_s;
  std::vector<double> target_shift;    // target - nominal, positive toward increasing arc length
  std::vector<double> achieved_shift;  // achieved - nominal
  std::vector<double> deflection;      // recovered per-pixel deflection [rad]
  UniformityReport before;
  UniformityReport after;

  std::size_t size() const { return achieved_s.size(); }
};

inline std::vector<double> unwrap_phase_row(std::span<const std::uint16_t> row, const PslmModel& model) {
  std::vector<double> phase(row.size());
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (row[k] > model.max_drive()) {
      throw Error(ErrorCode::OutOfRange, "drive level " + std::to_string(row[k]) + " at column " +
                                             std::to_string(k) + " exceeds levels-1");
    }
    phase[k] = phase_of_drive(model, row[k]);
  }
  unwrap_in_place(phase, model.phase_depth);
  return phase;
}

/// Sample range [first, last] used for block `i`'s mean gradient: the block
/// minus one boundary sample on each side, or the whole block when B < 4.
inline std::pair<std::size_t, std::size_t> block_gradient_span(std::size_t i, int block_size) {
  const auto b = static_cast<std::size_t>(block_size);
  const std::size_t begin = i * b;
  if (block_size >= 4) return {begin + 1, begin + b - 2};
  return {begin, begin + b - 1};
}

/// Mean finite-difference gradient [rad/m] of unwrapped phase over block i's span.
inline double block_mean_gradient(std::span<const double> unwrapped, std::size_t i, const PslmModel& model) {
  const auto [first, last] = block_gradient_span(i, model.block_size);
  return (unwrapped[last] - unwrapped[first]) / (static_cast<double>(last - first) * model.pitch);
}

inline void check_image_shape(const ProjectorModel& proj, const PslmModel& model, const PhaseImage& image) {
  const long expected = static_cast<long>(proj.n_cols) * model.block_size;
  if (image.width != expected) {
    throw Error(ErrorCode::InvalidModel, "phase image width " + std::to_string(image.width) + " != n_cols*block_size " +
                                             std::to_string(expected));
  }
  if (image.height < 1) throw Error(ErrorCode::InvalidModel, "phase image has no rows");
  if (image.levels != model.levels) {
    throw Error(ErrorCode::InvalidModel, "phase image levels " + std::to_string(image.levels) +
                                             " do not match pslm.levels " + std::to_string(model.levels));
  }
  const auto first = image.row(0);
  for (int r = 1; r < image.height; ++r) {
    if (!std::equal(first.begin(), first.end(), image.row(r).begin())) {
      throw Error(ErrorCode::InvalidModel, "phase image row " + std::to_string(r) + " differs from row 0");
    }
  }
}

/// Per-pixel deflections [rad] recovered from the first image row.
inline std::vector<double> recover_deflections(const ProjectorModel& proj, const PslmModel& model,
                                               const PhaseImage& image) {
  check_image_shape(proj, model, image);
  const std::vector<double> unwrapped = unwrap_phase_row(image.row(0), model);
  std::vector<double> theta(static_cast<std::size_t>(proj.n_cols));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    try {
      theta[i] = ramp_deflection(model, block_mean_gradient(unwrapped, i, model));
    } catch (const Error& e) {
      throw e.annotated("pixel " + std::to_string(i));
    }
  }
  return theta;
}

/// Arc length hit by each pixel ray after rotation by `deflection`.
inline std::vector<double> deflected_hits(const ProjectorModel& proj, const SurfaceProfile& surface,
                                          std::span<const double> deflection) {
  std::vector<double> s(deflection.size());
  parallel_for(s.size(), [&](std::size_t i) {
    const Ray ray = pixel_ray(proj, static_cast<double>(i));
    const Ray rotated{ray.origin, rotate_right(ray.direction, deflection[i])};
    try {
      s[i] = intersect(rotated, surface).s;
    } catch (const Error& e) {
      throw e.annotated("pixel " + std::to_string(i));
    }
  });
  return s;
}

inline SimulationResult forward_simulate(const ProjectorModel& proj, const SurfaceProfile& surface,
                                         const PslmModel& model, const PhaseImage& image) {
  SimulationResult r;
  r.deflection = recover_deflections(proj, model, image);
  const TargetPlan targets = uniform_targets(proj, surface);
  r.nominal_s = targets.nominal_s;
  r.target_s = targets.target_s;
  r.achieved_s = deflected_hits(proj, surface, r.deflection);

  const std::size_t n = r.achieved_s.size();
  r.target_shift.resize(n);
  r.achieved_shift.resize(n);
  double max_err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r.target_shift[i] = r.target_s[i] - r.nominal_s[i];
    r.achieved_shift[i] = r.achieved_s[i] - r.nominal_s[i];
    max_err = std::max(max_err, std::abs(r.achieved_s[i] - r.target_s[i]));
    if (i > 0 && !(r.achieved_s[i] > r.achieved_s[i - 1])) {
      throw Error(ErrorCode::NonMonotoneHits, "achieved hits reorder at pixel " + std::to_string(i));
    }
  }
  r.before = uniformity_metrics(pixel_footprints(proj, surface));
  r.after = uniformity_metrics(hit_spacings(r.achieved_s));
  r.after.max_abs_shift_error = max_err;
  return r;
}

/// Arc span of each run of `cell_px` consecutive pixel hits. Without an image
/// the nominal hits are used.
inline std::vector<double> checker_cells(const ProjectorModel& proj, const SurfaceProfile& surface,
                                         const PslmModel& model, const PhaseImage* image, int cell_px) {
  if (cell_px < 2 || proj.n_cols % cell_px != 0) {
    throw Error(ErrorCode::OutOfRange, "cell_px must be >= 2 and divide n_cols");
  }
  const std::vector<double> hits = image ? deflected_hits(proj, surface, recover_deflections(proj, model, *image))
                                         : nominal_hits(proj, surface);
  const auto c = static_cast<std::size_t>(cell_px);
  std::vector<double> cells(hits.size() / c);
  for (std::size_t j = 0; j < cells.size(); ++j) cells[j] = hits[(j + 1) * c - 1] - hits[j * c];
  return cells;
}

}  // namespace phaseforge
