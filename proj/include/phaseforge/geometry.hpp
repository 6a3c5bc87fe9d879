#pragma once

// Projector rays, polyline surface intersection and arc-length
// parameterization on a 2D horizontal cross-section.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "phaseforge/error.hpp"
#include "phaseforge/parallel.hpp"
#include "phaseforge/vec2.hpp"

namespace phaseforge {

/// Pinhole projector whose pixel rays are equally spaced in tangent, so the
/// pixel density is uniform on a flat screen perpendicular to `axis`.
struct ProjectorModel {
  Vec2 origin;
  Vec2 axis{0.0, 1.0};
  double h_fov = 0.0;  // full horizontal field between pixel 0 and pixel n-1 centers [rad]
  int n_cols = 0;

  void validate() const {
    if (!(h_fov > 0.0 && h_fov < std::numbers::pi)) {
      throw Error(ErrorCode::InvalidModel, "projector.h_fov must lie in (0, pi)");
    }
    if (n_cols < 2) throw Error(ErrorCode::InvalidModel, "projector.n_cols must be >= 2");
    if (!(std::abs(1.0 - norm(axis)) < 1e-12)) {
      throw Error(ErrorCode::InvalidModel, "projector.axis must have unit norm");
    }
  }

  double half_tan() const { return std::tan(0.5 * h_fov); }
  double tangent_step() const { return 2.0 * half_tan() / (n_cols - 1); }

  // Fan limits are the outer boundary rays at -0.5 and n_cols - 0.5.
  double fan_begin() const { return -0.5; }
  double fan_end() const { return n_cols - 0.5; }
};

struct Ray {
  Vec2 origin;
  Vec2 direction;
};

struct HitPoint {
  Vec2 point;
  std::size_t segment_index = 0;
  double s = 0.0;  // arc length from the first vertex [m]
  double t = 0.0;  // ray parameter [m]
};

/// Simple polyline cross-section of the projection surface.
class SurfaceProfile {
 public:
  SurfaceProfile() = default;

  explicit SurfaceProfile(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 2) {
      throw Error(ErrorCode::InvalidModel, "surface needs at least 2 vertices");
    }
    cumulative_.assign(vertices_.size(), 0.0);
    for (std::size_t k = 0; k + 1 < vertices_.size(); ++k) {
      const double len = norm(vertices_[k + 1] - vertices_[k]);
      if (!(len > 0.0)) {
        throw Error(ErrorCode::InvalidModel,
                    "surface vertices " + std::to_string(k) + " and " + std::to_string(k + 1) + " coincide");
      }
      cumulative_[k + 1] = cumulative_[k] + len;
    }
    check_simple();
  }

  std::span<const Vec2> vertices() const { return vertices_; }
  std::size_t segment_count() const { return vertices_.size() - 1; }
  double segment_length(std::size_t k) const { return cumulative_[k + 1] - cumulative_[k]; }
  double segment_start_s(std::size_t k) const { return cumulative_[k]; }
  double total_length() const { return cumulative_.back(); }

 private:
  static bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const Vec2 r = b - a;
    const Vec2 q = d - c;
    const double denom = cross(r, q);
    if (denom == 0.0) {
      // Parallel: intersecting only if collinear and overlapping.
      if (cross(c - a, r) != 0.0) return false;
      const double rr = dot(r, r);
      const double t0 = dot(c - a, r) / rr;
      const double t1 = dot(d - a, r) / rr;
      return std::max(t0, t1) >= 0.0 && std::min(t0, t1) <= 1.0;
    }
    const double t = cross(c - a, q) / denom;
    const double u = cross(c - a, r) / denom;
    return t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0;
  }

  void check_simple() const {
    const std::size_t n = segment_count();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (j == i + 1) {
          // Adjacent segments share a vertex; they may not fold back onto each other.
          const Vec2 r = vertices_[i + 1] - vertices_[i];
          const Vec2 q = vertices_[j + 1] - vertices_[j];
          if (cross(r, q) == 0.0 && dot(r, q) < 0.0) {
            throw Error(ErrorCode::InvalidModel, "surface folds back at vertex " + std::to_string(j));
          }
          continue;
        }
        if (segments_cross(vertices_[i], vertices_[i + 1], vertices_[j], vertices_[j + 1])) {
          throw Error(ErrorCode::InvalidModel, "surface segments " + std::to_string(i) + " and " +
                                                   std::to_string(j) + " intersect");
        }
      }
    }
  }

  std::vector<Vec2> vertices_;
  std::vector<double> cumulative_;
};

inline std::string pixel_label(double i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "pixel %g", i);
  return buf;
}

/// Ray through fractional pixel coordinate `i`, valid on [-0.5, n_cols - 0.5].
inline Ray pixel_ray(const ProjectorModel& proj, double i) {
  if (!(i >= proj.fan_begin() && i <= proj.fan_end())) {
    throw Error(ErrorCode::OutOfRange, pixel_label(i) + " is outside the projector fan");
  }
  const double tangent = -proj.half_tan() + i * proj.tangent_step();
  return {proj.origin, normalized(proj.axis + right_of(proj.axis) * tangent)};
}

namespace detail {

inline constexpr double kTieTolerance = 1e-12;  // [m] along the ray
inline constexpr double kEndpointSlack = 1e-12;  // [m] along a segment

inline std::optional<HitPoint> intersect_segment(const Ray& ray, const SurfaceProfile& surface, std::size_t k) {
  const Vec2 a = surface.vertices()[k];
  const Vec2 e = surface.vertices()[k + 1] - a;
  const double denom = cross(ray.direction, e);
  if (denom == 0.0) return std::nullopt;
  const Vec2 ao = a - ray.origin;
  const double t = cross(ao, e) / denom;
  const double u = cross(ao, ray.direction) / denom;
  const double len = surface.segment_length(k);
  if (!(t > 0.0)) return std::nullopt;
  if (u * len < -kEndpointSlack || (u - 1.0) * len > kEndpointSlack) return std::nullopt;
  const double uc = std::clamp(u, 0.0, 1.0);
  return HitPoint{a + e * uc, k, surface.segment_start_s(k) + uc * len, t};
}

// Collinear with the ray direction and passing through the ray: grazing.
inline bool grazes_segment(const Ray& ray, const SurfaceProfile& surface, std::size_t k) {
  const Vec2 a = surface.vertices()[k];
  const Vec2 b = surface.vertices()[k + 1];
  if (cross(ray.direction, b - a) != 0.0) return false;
  if (std::abs(cross(ray.direction, a - ray.origin)) > kEndpointSlack) return false;
  return dot(a - ray.origin, ray.direction) > 0.0 || dot(b - ray.origin, ray.direction) > 0.0;
}

}  // namespace detail

/// Nearest hit with positive ray parameter. A hit exactly on a shared vertex is
/// reported on the lower segment index.
inline HitPoint intersect(const Ray& ray, const SurfaceProfile& surface) {
  std::optional<HitPoint> best;
  std::optional<HitPoint> runner_up;
  for (std::size_t k = 0; k < surface.segment_count(); ++k) {
    if (detail::grazes_segment(ray, surface, k)) {
      throw Error(ErrorCode::AmbiguousIntersection, "ray runs along segment " + std::to_string(k));
    }
    auto hit = detail::intersect_segment(ray, surface, k);
    if (!hit) continue;
    if (!best || hit->t < best->t) {
      runner_up = best;
      best = hit;
    } else if (!runner_up || hit->t < runner_up->t) {
      runner_up = hit;
    }
  }
  if (!best) throw Error(ErrorCode::NoIntersection, "ray misses every surface segment");
  if (runner_up && std::abs(runner_up->t - best->t) <= detail::kTieTolerance) {
    const std::size_t lo = std::min(best->segment_index, runner_up->segment_index);
    const std::size_t hi = std::max(best->segment_index, runner_up->segment_index);
    const bool shared_vertex = hi == lo + 1 && norm(best->point - surface.vertices()[hi]) <= detail::kTieTolerance &&
                               norm(runner_up->point - surface.vertices()[hi]) <= detail::kTieTolerance;
    if (!shared_vertex) {
      throw Error(ErrorCode::AmbiguousIntersection,
                  "segments " + std::to_string(lo) + " and " + std::to_string(hi) + " tie along the ray");
    }
    HitPoint vertex_hit = best->segment_index == lo ? *best : *runner_up;
    vertex_hit.point = surface.vertices()[hi];
    vertex_hit.s = surface.segment_start_s(hi);
    vertex_hit.t = std::min(best->t, runner_up->t);
    return vertex_hit;
  }
  return *best;
}

inline Vec2 point_at_arclength(const SurfaceProfile& surface, double s) {
  if (!(s >= 0.0 && s <= surface.total_length())) {
    throw Error(ErrorCode::OutOfRange, "arc length " + std::to_string(s) + " outside [0, " +
                                           std::to_string(surface.total_length()) + "]");
  }
  std::size_t k = 0;
  while (k + 1 < surface.segment_count() && s > surface.segment_start_s(k + 1)) ++k;
  const double u = (s - surface.segment_start_s(k)) / surface.segment_length(k);
  const Vec2 a = surface.vertices()[k];
  const Vec2 b = surface.vertices()[k + 1];
  if (u >= 1.0) return b;
  return a + (b - a) * u;
}

inline double arclength_of_point(const SurfaceProfile& surface, Vec2 p) {
  constexpr double kOnSurface = 1e-9;
  double best_dist = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  for (std::size_t k = 0; k < surface.segment_count(); ++k) {
    const Vec2 a = surface.vertices()[k];
    const Vec2 e = surface.vertices()[k + 1] - a;
    const double len = surface.segment_length(k);
    const double u = std::clamp(dot(p - a, e) / (len * len), 0.0, 1.0);
    const double dist = norm(p - (a + e * u));
    if (dist < best_dist) {
      best_dist = dist;
      best_s = surface.segment_start_s(k) + u * len;
    }
  }
  if (best_dist > kOnSurface) {
    throw Error(ErrorCode::NotOnSurface, "point is " + std::to_string(best_dist) + " m from the surface");
  }
  return best_s;
}

/// Arc length hit by the ray through fractional pixel coordinate `i`.
inline double hit_arclength(const ProjectorModel& proj, const SurfaceProfile& surface, double i) {
  try {
    return intersect(pixel_ray(proj, i), surface).s;
  } catch (const Error& e) {
    throw e.annotated(pixel_label(i));
  }
}

/// Nominal (unmodulated) hit arc length for every pixel center.
inline std::vector<double> nominal_hits(const ProjectorModel& proj, const SurfaceProfile& surface) {
  std::vector<double> s(static_cast<std::size_t>(proj.n_cols));
  parallel_for(s.size(), [&](std::size_t i) { s[i] = hit_arclength(proj, surface, static_cast<double>(i)); });
  return s;
}

/// Arc-length extent covered by each pixel, bounded by the rays at i - 0.5 and i + 0.5.
inline std::vector<double> pixel_footprints(const ProjectorModel& proj, const SurfaceProfile& surface) {
  const std::size_t n = static_cast<std::size_t>(proj.n_cols);
  std::vector<double> boundary(n + 1);
  parallel_for(boundary.size(),
               [&](std::size_t b) { boundary[b] = hit_arclength(proj, surface, static_cast<double>(b) - 0.5); });
  std::vector<double> footprints(n);
  for (std::size_t i = 0; i < n; ++i) {
    footprints[i] = boundary[i + 1] - boundary[i];
    if (!(footprints[i] > 0.0)) {
      throw Error(ErrorCode::NonMonotoneHits,
                  "pixel " + std::to_string(i) + " has a non-positive footprint; surface must advance with pixel index");
    }
  }
  return footprints;
}

/// Load-time check: both outer boundary rays hit the surface, and every pixel
/// center and boundary hit advances in arc length with the pixel index.
inline void validate_fan(const ProjectorModel& proj, const SurfaceProfile& surface) {
  (void)pixel_footprints(proj, surface);
}

}  // namespace phaseforge
