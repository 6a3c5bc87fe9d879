#pragma once

// Uniform-density target placement and the deflections that realize it.

#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phaseforge/error.hpp"
#include "phaseforge/geometry.hpp"

namespace phaseforge {

/// Per-pixel nominal hit, uniform target and the signed deflection (positive
/// toward increasing image x) that moves one onto the other.
struct TargetPlan {
  std::vector<double> nominal_s;
  std::vector<double> target_s;
  std::vector<double> deflection;

  std::size_t size() const { return nominal_s.size(); }
};

struct UniformityReport {
  std::vector<double> footprints;
  double mean = 0.0;
  double stdev = 0.0;  // population
  double cv = 0.0;
  std::optional<double> max_abs_shift_error;
};

/// Targets equally spaced in arc length between the nominal hits of the first
/// and last pixel. Targets within 1e-12 m of their nominal hit snap onto it so
/// that an already uniform layout compiles to exactly zero deflection.
inline TargetPlan uniform_targets(const ProjectorModel& proj, const SurfaceProfile& surface) {
  constexpr double kSnap = 1e-12;
  TargetPlan plan;
  plan.nominal_s = nominal_hits(proj, surface);
  const std::size_t n = plan.nominal_s.size();
  const double first = plan.nominal_s.front();
  const double last = plan.nominal_s.back();
  if (!(last > first)) {
    throw Error(ErrorCode::NonMonotoneHits, "surface arc length must increase from pixel 0 to pixel n-1");
  }
  const double step = (last - first) / static_cast<double>(n - 1);
  plan.target_s.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double t = first + static_cast<double>(i) * step;
    if (i == n - 1) t = last;
    if (std::abs(t - plan.nominal_s[i]) <= kSnap) t = plan.nominal_s[i];
    plan.target_s[i] = t;
  }
  plan.deflection.assign(n, 0.0);
  return plan;
}

/// Fills `plan.deflection`: rotation of each pixel ray about the projector
/// origin that lands it on its target.
inline TargetPlan required_deflections(const ProjectorModel& proj, const SurfaceProfile& surface, TargetPlan plan) {
  constexpr double kLanding = 1e-9;
  const std::size_t n = plan.size();
  if (plan.target_s.size() != n || n != static_cast<std::size_t>(proj.n_cols)) {
    throw Error(ErrorCode::InvalidModel, "target plan size does not match the projector");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(plan.target_s[i] > plan.target_s[i - 1])) {
      throw Error(ErrorCode::NonMonotoneHits, "targets must strictly increase (pixel " + std::to_string(i) + ")");
    }
  }
  plan.deflection.assign(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    if (plan.target_s[i] == plan.nominal_s[i]) return;
    const Ray ray = pixel_ray(proj, static_cast<double>(i));
    const Vec2 target = point_at_arclength(surface, plan.target_s[i]);
    const double angle = signed_angle(ray.direction, normalized(target - proj.origin));
    const Ray rotated{proj.origin, rotate_right(ray.direction, angle)};
    double landed = 0.0;
    try {
      landed = intersect(rotated, surface).s;
    } catch (const Error& e) {
      throw Error(ErrorCode::TargetUnreachable, "pixel " + std::to_string(i) + ": " + e.what());
    }
    if (std::abs(landed - plan.target_s[i]) > kLanding) {
      throw Error(ErrorCode::TargetUnreachable, "pixel " + std::to_string(i) + " target at s=" +
                                                    std::to_string(plan.target_s[i]) + " is shadowed by the surface");
    }
    plan.deflection[i] = angle;
  });
  return plan;
}

inline UniformityReport uniformity_metrics(std::span<const double> footprints) {
  if (footprints.empty()) throw Error(ErrorCode::EmptyInput, "no footprints");
  for (std::size_t i = 0; i < footprints.size(); ++i) {
    if (!(footprints[i] > 0.0)) {
      throw Error(ErrorCode::NonPositiveFootprint, "footprint " + std::to_string(i) + " is not positive");
    }
  }
  UniformityReport report;
  report.footprints.assign(footprints.begin(), footprints.end());
  const double n = static_cast<double>(footprints.size());
  report.mean = std::accumulate(footprints.begin(), footprints.end(), 0.0) / n;
  double ss = 0.0;
  for (double f : footprints) ss += (f - report.mean) * (f - report.mean);
  report.stdev = std::sqrt(ss / n);
  report.cv = report.stdev / report.mean;
  return report;
}

/// Spacing between consecutive hits; the footprint measure used once rays are
/// redirected and no longer have boundary rays of their own.
inline std::vector<double> hit_spacings(std::span<const double> hits) {
  std::vector<double> d;
  if (hits.size() < 2) return d;
  d.reserve(hits.size() - 1);
  for (std::size_t i = 1; i < hits.size(); ++i) d.push_back(hits[i] - hits[i - 1]);
  return d;
}

}  // namespace phaseforge
