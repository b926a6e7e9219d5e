#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>

#include "tacmod/contact/features.hpp"
#include "tacmod/sim/hertz.hpp"
#include "tacmod/sim/simulate.hpp"

using namespace tacmod;
using boost::math::quadrature::tanh_sinh;

TEST(HertzForce, ZeroAndHomogeneity) {
  EXPECT_EQ(hertz::force(0.0, 2e5, 0.02), 0.0);
  const double f1 = hertz::force(1e-4, 2e5, 0.02);
  EXPECT_NEAR(hertz::force(2e-4, 2e5, 0.02) / f1, std::pow(2.0, 1.5), 1e-12);
  EXPECT_NEAR(hertz::approach_for_force(f1, 2e5, 0.02), 1e-4, 1e-16);
}

TEST(Pressure, Endpoints) {
  EXPECT_EQ(hertz::pressure_field(0.0, 1e4, 1e-3), 1e4);
  EXPECT_EQ(hertz::pressure_field(1e-3, 1e4, 1e-3), 0.0);
  EXPECT_EQ(hertz::pressure_field(2e-3, 1e4, 1e-3), 0.0);
}

TEST(Pressure, IntegratesToForce) {
  tanh_sinh<double> q;
  for (double force : {0.3, 1.19, 30.0}) {
    const double a = 2.3e-3;
    const double p0 = hertz::peak_pressure(force, a);
    const double total = q.integrate(
        [&](double r) { return 2.0 * std::numbers::pi * r * hertz::pressure_field(r, p0, a); }, 0.0, a);
    EXPECT_NEAR(total / force, 1.0, 1e-6);
  }
}

TEST(LineLoad, MatchesQuadratureOfAbelTransform) {
  // q(x) = 2 int_x^a r p(r) / sqrt(r^2 - x^2) dr; substitute r = sqrt(x^2 + s^2)
  // to remove the endpoint singularity: q(x) = 2 int_0^sqrt(a^2-x^2) p(r(s)) ds.
  tanh_sinh<double> q;
  const double a = 1.7e-3;
  const double p0 = 4.2e4;
  for (int k = 0; k < 20; ++k) {
    const double x = a * k / 20.0;
    const double top = std::sqrt(a * a - x * x);
    const double numeric =
        2.0 * q.integrate([&](double s) { return hertz::pressure_field(std::sqrt(x * x + s * s), p0, a); }, 0.0, top);
    const double closed = hertz::mdr_line_load(x, p0, a);
    EXPECT_NEAR(numeric / closed, 1.0, 1e-8) << x;
  }
  EXPECT_EQ(hertz::mdr_line_load(a, p0, a), 0.0);
  EXPECT_NEAR(hertz::mdr_line_load(0.0, p0, a), std::numbers::pi * p0 * a / 2.0, 1e-9);
}

TEST(LineLoad, CentreIsTwiceTheHalfLineIntegral) {
  tanh_sinh<double> q;
  const double a = 1e-3;
  const double p0 = 1e4;
  const double half = q.integrate([&](double r) { return hertz::pressure_field(r, p0, a); }, 0.0, a);
  EXPECT_NEAR(half, std::numbers::pi * p0 * a / 4.0, 1e-12);
  EXPECT_NEAR(hertz::mdr_line_load(0.0, p0, a), 2.0 * half, 1e-12);
}

TEST(SurfaceProfile, CentreEqualsClosedFormDepth) {
  const SensorSpec s;
  for (double star : {3e3, 5e4, 3e5}) {
    for (double force : {0.8, 5.0, 30.0}) {
      const double radius = 0.015;
      const double a = hertz::contact_radius(hertz::approach_for_force(force, star, radius), radius);
      const double u0 = hertz::surface_profile(0.0, s, hertz::peak_pressure(force, a), a);
      const double d = hertz::peak_depth(force, star, radius, a, s);
      EXPECT_NEAR(u0 / d, 1.0, 1e-10);
    }
  }
}

TEST(SurfaceProfile, ZeroOutsideAndNonIncreasing) {
  const SensorSpec s;
  const double a = 2e-3;
  EXPECT_EQ(hertz::surface_profile(a, s, 1e4, a), 0.0);
  EXPECT_EQ(hertz::surface_profile(3 * a, s, 1e4, a), 0.0);
  double prev = hertz::surface_profile(0.0, s, 1e4, a);
  for (int k = 1; k <= 100; ++k) {
    const double u = hertz::surface_profile(a * k / 100.0, s, 1e4, a);
    EXPECT_LE(u, prev);
    prev = u;
  }
}

TEST(Simulate, DeterministicForSeed) {
  SimObject o;
  SimConfig c;
  c.peak_force_n = 5.0;
  c.seed = 3;
  const SensorSpec s;
  EXPECT_EQ(simulate_grasp(o, c, s), simulate_grasp(o, c, s));
  SimConfig d = c;
  d.seed = 4;
  EXPECT_FALSE(simulate_grasp(o, c, s) == simulate_grasp(o, d, s));
}

TEST(Simulate, NoiselessApexMatchesClosedForm) {
  SimObject o;
  o.youngs_modulus_pa = 5e5;
  SimConfig c = SimConfig{}.noiseless();
  c.peak_force_n = 12.0;
  const SensorSpec s;
  std::vector<SimFrameState> states;
  const auto g = simulate_grasp(o, c, s, &states);
  ASSERT_EQ(states.size(), g.size());
  const double star = sim_aggregate_modulus(o, s);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double expected = states[k].force_n > 0.0 ? hertz::peak_depth(states[k].force_n, star, o.radius_m,
                                                                        states[k].contact_radius_m, s)
                                                    : 0.0;
    EXPECT_NEAR(max_depth(g.frames()[k], 0.0), expected, 1e-3 * 1.2e-7 + expected * 1.2e-7) << k;
  }
}

TEST(Simulate, ForceReachesPeakAndHolds) {
  SimObject o;
  SimConfig c = SimConfig{}.noiseless();
  c.peak_force_n = 8.0;
  const SensorSpec s;
  const auto g = simulate_grasp(o, c, s);
  EXPECT_NEAR(g.force_n().back(), 8.0, 1e-9);
  const auto hold = static_cast<std::size_t>(c.hold_time_s * c.frame_rate_hz);
  for (std::size_t k = g.size() - hold; k < g.size(); ++k) EXPECT_NEAR(g.force_n()[k], 8.0, 1e-9);
  for (std::size_t k = 1; k < g.size(); ++k) {
    EXPECT_GE(g.force_n()[k], g.force_n()[k - 1]);
    EXPECT_LE(g.width_m()[k], g.width_m()[k - 1]);
    EXPECT_NEAR(g.frames()[k].timestamp_s() - g.frames()[k - 1].timestamp_s(), 1.0 / 30.0, 1e-12);
  }
  EXPECT_EQ(g.label_pa(), o.youngs_modulus_pa);
  EXPECT_EQ(g.metadata().at("shape"), "sphere");
}

TEST(Simulate, TooLargeContactIsRejected) {
  SimObject o;
  o.youngs_modulus_pa = 1e4;
  SimConfig c;
  c.peak_force_n = 30.0;
  try {
    simulate_grasp(o, c, SensorSpec{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ObjectTooLarge);
  }
}

TEST(Simulate, PeakForceThatFitsFits) {
  const SensorSpec s;
  for (double e : {1e4, 1e6, 1e9}) {
    for (double r : {0.005, 0.03}) {
      SimObject o;
      o.youngs_modulus_pa = e;
      o.radius_m = r;
      SimConfig c = SimConfig{}.noiseless();
      c.peak_force_n = peak_force_that_fits(o, s);
      EXPECT_NO_THROW(simulate_grasp(o, c, s)) << e << ' ' << r;
    }
  }
}

TEST(Simulate, FlipSymmetricNoiselessFrames) {
  // Odd pixel counts put the apex at the exact centre.
  SensorSpec s;
  s.pixels_x = 101;
  s.pixels_y = 71;
  s.width_mm = 30.3;
  s.height_mm = 21.3;
  SimObject o;
  SimConfig c = SimConfig{}.noiseless();
  c.peak_force_n = 3.0;
  const auto g = simulate_grasp(o, c, s);
  EXPECT_EQ(g.flipped(true, true), g);
}
