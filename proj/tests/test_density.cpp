#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

namespace phaseforge {
namespace {

using testing::deg;

ProjectorModel square_projector(int n_cols) {
  ProjectorModel p;
  p.h_fov = deg(90.0);  // tan(45deg) = 1: pixel 0 and n-1 land on x = -1 and x = +1 at z = 1
  p.n_cols = n_cols;
  return p;
}

TEST(UniformTargets, ArithmeticProgressionOverNominalSpan) {
  const SurfaceProfile flat({{-1, 1}, {1, 1}});
  const TargetPlan plan = uniform_targets(square_projector(5), flat);
  const double expected[] = {0.0, 0.5, 1.0, 1.5, 2.0};
  ASSERT_EQ(plan.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(plan.target_s[i], expected[i], 1e-12);
}

TEST(UniformTargets, FlatSurfaceTargetsAreNominal) {
  const auto cfg = testing::demo_scenario("flat");
  const TargetPlan plan = uniform_targets(cfg.projector, cfg.surface);
  for (std::size_t i = 0; i < plan.size(); ++i) EXPECT_EQ(plan.target_s[i], plan.nominal_s[i]);
}

TEST(UniformTargets, BentSurfaceTargetsAreEquallySpacedAndAnchored) {
  const auto cfg = testing::demo_scenario();
  const TargetPlan plan = uniform_targets(cfg.projector, cfg.surface);
  EXPECT_EQ(plan.target_s.front(), plan.nominal_s.front());
  EXPECT_EQ(plan.target_s.back(), plan.nominal_s.back());
  const auto spacing = hit_spacings(plan.target_s);
  EXPECT_LT(testing::population_cv(spacing), 1e-12);
  const double step = (plan.nominal_s.back() - plan.nominal_s.front()) / (plan.size() - 1);
  for (double d : spacing) EXPECT_NEAR(d, step, 1e-12);
  double moved = 0.0;
  for (std::size_t i = 1; i + 1 < plan.size(); ++i) moved = std::max(moved, std::abs(plan.target_s[i] - plan.nominal_s[i]));
  EXPECT_GT(moved, 1e-3);
}

TEST(RequiredDeflections, IdentityGivesZero) {
  const auto cfg = testing::demo_scenario("flat");
  const TargetPlan plan = required_deflections(cfg.projector, cfg.surface, uniform_targets(cfg.projector, cfg.surface));
  for (double d : plan.deflection) EXPECT_EQ(d, 0.0);
}

TEST(RequiredDeflections, CenterPixelClosedForm) {
  ProjectorModel p;
  p.h_fov = deg(30.0);
  p.n_cols = 3;
  const SurfaceProfile flat({{-1, 1}, {1, 1}});
  TargetPlan plan = uniform_targets(p, flat);
  plan.target_s[1] = 1.1;  // point (0.1, 1.0)
  plan = required_deflections(p, flat, plan);
  EXPECT_NEAR(plan.deflection[1], 0.099668652491162027, 1e-15);  // atan(0.1)
  EXPECT_EQ(plan.deflection[0], 0.0);
}

TEST(RequiredDeflections, RoundTripLandsOnTargets) {
  for (const char* name : {"bent-surface", "flat"}) {
    const auto cfg = testing::demo_scenario(name);
    const TargetPlan plan =
        required_deflections(cfg.projector, cfg.surface, uniform_targets(cfg.projector, cfg.surface));
    for (std::size_t i = 0; i < plan.size(); ++i) {
      const Ray r = pixel_ray(cfg.projector, static_cast<double>(i));
      const double s = intersect({r.origin, rotate_right(r.direction, plan.deflection[i])}, cfg.surface).s;
      EXPECT_NEAR(s, plan.target_s[i], 1e-9) << name << " pixel " << i;
      EXPECT_LT(std::abs(plan.deflection[i]), std::numbers::pi / 2);
    }
  }
}

TEST(RequiredDeflections, BentDemoFitsEightyPercentOfNyquist) {
  const auto cfg = testing::demo_scenario();
  const TargetPlan plan = required_deflections(cfg.projector, cfg.surface, uniform_targets(cfg.projector, cfg.surface));
  double max_defl = 0.0;
  for (double d : plan.deflection) max_defl = std::max(max_defl, std::abs(d));
  EXPECT_LE(max_defl, 0.8 * cfg.pslm.nyquist_angle());
}

TEST(RequiredDeflections, ShadowedTargetIsUnreachable) {
  // Back wall at z = 1 with a ledge at z = 0.55..0.6 over x in [-0.2, 0.05].
  ProjectorModel p;
  p.h_fov = deg(60.0);
  p.n_cols = 3;
  const SurfaceProfile surface({{-1, 1}, {0.05, 1}, {0.05, 0.6}, {-0.2, 0.6}, {-0.2, 0.55}, {1, 0.55}});
  TargetPlan visible = uniform_targets(p, surface);
  visible.target_s[1] = arclength_of_point(surface, {-0.5, 1.0});
  EXPECT_NO_THROW(required_deflections(p, surface, visible));

  TargetPlan hidden = uniform_targets(p, surface);
  hidden.target_s[1] = arclength_of_point(surface, {-0.1, 1.0});
  try {
    required_deflections(p, surface, hidden);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TargetUnreachable);
    EXPECT_NE(std::string(e.what()).find("pixel 1"), std::string::npos);
  }
}

TEST(UniformityMetrics, Examples) {
  const double flat[] = {1.0, 1.0, 1.0};
  EXPECT_EQ(uniformity_metrics(flat).cv, 0.0);
  const double two[] = {1.0, 2.0};
  const auto r = uniformity_metrics(two);
  EXPECT_DOUBLE_EQ(r.mean, 1.5);
  EXPECT_DOUBLE_EQ(r.stdev, 0.5);
  EXPECT_DOUBLE_EQ(r.cv, 1.0 / 3.0);
}

TEST(UniformityMetrics, Errors) {
  try {
    uniformity_metrics(std::span<const double>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyInput);
  }
  const double bad[] = {1.0, 0.0};
  try {
    uniformity_metrics(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveFootprint);
  }
}

TEST(UniformityMetrics, BentDemoBeforeCompilationIsUneven) {
  const auto cfg = testing::demo_scenario();
  const auto oracle = testing::dense_ray_footprints(cfg.projector, cfg.surface);
  const auto report = uniformity_metrics(pixel_footprints(cfg.projector, cfg.surface));
  EXPECT_GT(report.cv, 0.1);
  EXPECT_NEAR(report.cv, testing::population_cv(oracle), 1e-4);
}

TEST(UniformTargets, IdempotentOnAlreadyUniformLayouts) {
  // Perpendicular screens at several depths: nominal hits are already equally spaced.
  ProjectorModel p;
  p.h_fov = deg(40.0);
  p.n_cols = 64;
  for (double z : {0.7, 1.0, 2.5}) {
    const SurfaceProfile flat({{-3, z}, {3, z}});
    const TargetPlan plan = required_deflections(p, flat, uniform_targets(p, flat));
    for (double d : plan.deflection) EXPECT_LT(std::abs(d), 1e-12);
  }
}

}  // namespace
}  // namespace phaseforge
