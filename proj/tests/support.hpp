#pragma once

// Shared fixtures and independent oracles. The oracles here deliberately do
// not call into the library code they check.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "phaseforge/cli.hpp"
#include "phaseforge/config.hpp"
#include "phaseforge/phaseforge.hpp"

namespace phaseforge::testing {

inline ScenarioConfig demo_scenario(const std::string& name = "bent-surface") {
  return parse_config(cli::demo_config_json(name));
}

inline PslmModel bench_model() {
  PslmModel m;
  m.pitch = 8e-6;
  m.wavelength = 532e-9;
  m.ref_plane_distance = 1.0;
  return m;
}

inline double deg(double d) { return d * std::numbers::pi / 180.0; }

struct OracleHit {
  std::size_t segment = 0;
  double t = 0.0;
  double x = 0.0;
  double z = 0.0;
  double s = 0.0;
};

/// Brute-force nearest hit: each segment's supporting line in implicit form
/// n.p = c, then a containment test by projection.
inline std::optional<OracleHit> brute_force_hit(double ox, double oz, double dx, double dz,
                                                const std::vector<std::pair<double, double>>& verts) {
  std::optional<OracleHit> best;
  double s0 = 0.0;
  for (std::size_t k = 0; k + 1 < verts.size(); ++k) {
    const auto [ax, az] = verts[k];
    const auto [bx, bz] = verts[k + 1];
    const double ex = bx - ax, ez = bz - az;
    const double len = std::sqrt(ex * ex + ez * ez);
    const double nx = -ez, nz = ex;
    const double c = nx * ax + nz * az;
    const double nd = nx * dx + nz * dz;
    if (nd != 0.0) {
      const double t = (c - (nx * ox + nz * oz)) / nd;
      const double px = ox + t * dx, pz = oz + t * dz;
      const double u = ((px - ax) * ex + (pz - az) * ez) / (len * len);
      if (t > 0.0 && u >= 0.0 && u <= 1.0 && (!best || t < best->t)) {
        best = OracleHit{k, t, px, pz, s0 + u * len};
      }
    }
    s0 += len;
  }
  return best;
}

inline std::vector<std::pair<double, double>> vertex_pairs(const SurfaceProfile& s) {
  std::vector<std::pair<double, double>> v;
  for (Vec2 p : s.vertices()) v.emplace_back(p.x, p.z);
  return v;
}

/// Footprints from a dense fan of rays: arc length is sampled on `samples`
/// rays equally spaced in tangent and linearly interpolated at each pixel
/// boundary.
inline std::vector<double> dense_ray_footprints(const ProjectorModel& proj, const SurfaceProfile& surface,
                                                std::size_t samples = 100000) {
  const auto verts = vertex_pairs(surface);
  const double h = std::tan(0.5 * proj.h_fov);
  const double step = 2.0 * h / (proj.n_cols - 1);
  const double u0 = -0.5, u1 = proj.n_cols - 0.5;
  const double ax = proj.axis.x, az = proj.axis.z;
  const double rx = az, rz = -ax;
  std::vector<double> s(samples);
  for (std::size_t j = 0; j < samples; ++j) {
    const double u = u0 + (u1 - u0) * static_cast<double>(j) / static_cast<double>(samples - 1);
    const double t = -h + u * step;
    const double dx = ax + rx * t, dz = az + rz * t;
    const auto hit = brute_force_hit(proj.origin.x, proj.origin.z, dx, dz, verts);
    s[j] = hit ? hit->s : std::numeric_limits<double>::quiet_NaN();
  }
  auto s_at = [&](double u) {
    const double pos = (u - u0) / (u1 - u0) * static_cast<double>(samples - 1);
    const auto j = std::min(static_cast<std::size_t>(pos), samples - 2);
    const double w = pos - static_cast<double>(j);
    return s[j] + w * (s[j + 1] - s[j]);
  };
  std::vector<double> fp(static_cast<std::size_t>(proj.n_cols));
  for (int i = 0; i < proj.n_cols; ++i) fp[static_cast<std::size_t>(i)] = s_at(i + 0.5) - s_at(i - 0.5);
  return fp;
}

inline double population_cv(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size())) / mean;
}

/// Random slope plan whose block-to-block slope changes stay below
/// `max_step` (fraction of Nyquist) and whose magnitude stays below `max_abs`.
inline SlopePlan random_smooth_plan(std::mt19937_64& rng, const PslmModel& m, int blocks, double max_abs = 0.8,
                                    double max_step = 0.05) {
  std::uniform_real_distribution<double> start(-max_abs, max_abs);
  std::uniform_real_distribution<double> step(-max_step, max_step);
  SlopePlan plan;
  plan.block_size = m.block_size;
  plan.pitch = m.pitch;
  double g = start(rng);
  for (int i = 0; i < blocks; ++i) {
    plan.slope.push_back(g * m.nyquist_gradient());
    plan.delta_drive.push_back(drive_step_of_gradient(m, plan.slope.back()));
    g = std::clamp(g + step(rng), -max_abs, max_abs);
  }
  return plan;
}

}  // namespace phaseforge::testing
