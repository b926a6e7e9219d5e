#include <gtest/gtest.h>

#include <cmath>

#include "tacmod/analytic/estimators.hpp"
#include "tacmod/sim/simulate.hpp"

using namespace tacmod;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no tacmod::Error thrown";
  return ErrorKind::InvariantViolation;
}

// Features synthesized directly from the closed-form depth relation.
ContactFeatureSeries exact_series(double aggregate, double radius, const SensorSpec& s) {
  ContactFeatureSeries f;
  for (int i = 1; i <= 12; ++i) {
    const double force = 0.5 * i;
    const double approach = hertz::approach_for_force(force, aggregate, radius);
    const double a = hertz::contact_radius(approach, radius);
    f.force_n.push_back(force);
    f.contact_radius_m.push_back(a);
    f.area_m2.push_back(std::numbers::pi * a * a);
    f.apparent_radius_m.push_back(radius);
    f.max_depth_m.push_back(hertz::peak_depth(force, aggregate, radius, a, s));
    f.width_m.push_back(0.05 - 2 * approach);
  }
  return f;
}

}  // namespace

TEST(Aggregate, RigidObjectLimit) {
  // E_obj -> inf leaves only the gel term: 275000 / (1 - 0.48^2).
  MaterialAssumptions m;
  const double oracle = 275000.0 / (1.0 - 0.48 * 0.48);
  EXPECT_NEAR(oracle, 357328.0, 1.0);
  EXPECT_NEAR(aggregate_modulus(1e15, m), oracle, oracle * 1e-9);
}

TEST(Aggregate, SymmetricBodies) {
  MaterialAssumptions m;
  m.poisson_obj = 0.48;
  const double oracle = 275000.0 / (2.0 * (1.0 - 0.48 * 0.48));
  EXPECT_NEAR(oracle, 178664.0, 1.0);
  EXPECT_NEAR(aggregate_modulus(275000.0, m), oracle, 1e-6);
}

TEST(Aggregate, InvertSymmetricCaseWithObjectPoisson) {
  // 1/E* - (1 - nu_s^2)/E_s = (1 - nu_s^2)/E_s, so E_obj = E_s (1 - nu_o^2)/(1 - nu_s^2).
  MaterialAssumptions m;
  const double e_star = 275000.0 / (2.0 * (1.0 - 0.48 * 0.48));
  const double oracle = 275000.0 * (1.0 - 0.16) / (1.0 - 0.2304);
  EXPECT_NEAR(oracle, 300156.0, 1.0);
  EXPECT_NEAR(invert_aggregate(e_star, m), oracle, oracle * 1e-12);
}

TEST(Aggregate, RigidLimitExceeded) {
  MaterialAssumptions m;
  EXPECT_EQ(kind_of([&] { invert_aggregate(357329.0, m); }), ErrorKind::RigidLimitExceeded);
  EXPECT_EQ(kind_of([&] { invert_aggregate(1e6, m); }), ErrorKind::RigidLimitExceeded);
}

TEST(Aggregate, RoundTripAndMonotone) {
  MaterialAssumptions m;
  double prev = 0.0;
  for (double e = 1e2; e < 1e12; e *= 1.7) {
    const double star = aggregate_modulus(e, m);
    EXPECT_GT(star, prev);
    prev = star;
    EXPECT_NEAR(invert_aggregate(star, m) / e, 1.0, e > 1e9 ? 1e-5 : 1e-9);
  }
}

TEST(Elastic, ExactLinearData) {
  const std::vector<double> eps{-0.01, -0.02, -0.03};
  std::vector<double> sigma;
  for (double e : eps) sigma.push_back(5e5 * std::abs(e));
  const auto est = fit_elastic(sigma, eps);
  EXPECT_NEAR(est.value_pa, 5e5, 1e-6);
  EXPECT_NEAR(est.diagnostics.residual_norm, 0.0, 1e-9);
  EXPECT_EQ(est.method, EstimateMethod::elastic);
}

TEST(Elastic, ZeroStrainIsDegenerate) {
  EXPECT_EQ(kind_of([] { fit_elastic(std::vector<double>{1, 2}, std::vector<double>{0, 0}); }),
            ErrorKind::DegenerateFit);
}

TEST(Elastic, ScaleEquivariantInForce) {
  const std::vector<double> eps{0, -0.01, -0.025, -0.04};
  const std::vector<double> sigma{0, 900, 2600, 3900};
  std::vector<double> scaled;
  for (double s : sigma) scaled.push_back(3.0 * s);
  EXPECT_NEAR(fit_elastic(scaled, eps).value_pa / fit_elastic(sigma, eps).value_pa, 3.0, 1e-12);
}

TEST(Hertz, HandArithmeticForce) {
  // (4/3) 2e5 sqrt(0.02) (1e-3)^1.5
  const double oracle = 4.0 / 3.0 * 2e5 * 0.1414213562373095 * 3.1622776601683795e-5;
  EXPECT_NEAR(oracle, 1.19, 0.005);
  EXPECT_NEAR(hertz::force(1e-3, 2e5, 0.02), oracle, 1e-12);
}

TEST(Hertz, RecoversAggregateFromExactSeries) {
  const SensorSpec s;
  for (double star : {1e4, 1e5, 1e6, 1e7}) {
    const auto f = exact_series(star, 0.02, s);
    const double fitted = std::pow(fit_mdr_slope(f, s).slope, 1.5);
    EXPECT_NEAR(fitted / star, 1.0, 1e-3) << star;
  }
}

TEST(Hertz, RecoversExactSeriesTightly) {
  // Through E_obj: the inversion amplifies relative error by E*/(E*_rigid - E*).
  const SensorSpec s;
  MaterialAssumptions m;
  const double star = 2e5;
  const auto est = fit_hertz_mdr(exact_series(star, 0.02, s), m);
  EXPECT_NEAR(est.value_pa / invert_aggregate(star, m), 1.0, 1e-9);
  EXPECT_EQ(est.method, EstimateMethod::hertz);
}

TEST(Hertz, ZeroDepthIsDegenerate) {
  const SensorSpec s;
  auto f = exact_series(2e5, 0.02, s);
  std::fill(f.max_depth_m.begin(), f.max_depth_m.end(), 0.0);
  EXPECT_EQ(kind_of([&] { fit_hertz_mdr(f, MaterialAssumptions{}); }), ErrorKind::DegenerateFit);
}

TEST(Hertz, StiffFitIsFlaggedNotThrown) {
  const SensorSpec s;
  const auto est = fit_hertz_mdr(exact_series(4e5, 0.02, s), MaterialAssumptions{});
  EXPECT_TRUE(est.diagnostics.rigid_limit);
  EXPECT_EQ(est.value_pa, kMaxModulusPa);
}

TEST(Hertz, InvariantUnderTimeReparameterization) {
  const SensorSpec s;
  MaterialAssumptions m;
  auto f = exact_series(1.5e5, 0.015, s);
  const double base = fit_hertz_mdr(f, m).value_pa;
  // Reverse the frame order: the fit sees the same point set.
  auto rev = [](std::vector<double>& v) { std::reverse(v.begin(), v.end()); };
  rev(f.force_n);
  rev(f.contact_radius_m);
  rev(f.area_m2);
  rev(f.apparent_radius_m);
  rev(f.max_depth_m);
  EXPECT_NEAR(fit_hertz_mdr(f, m).value_pa / base, 1.0, 1e-12);
}

TEST(Hertz, SoftSphereWithinFactorThree) {
  SimObject o;
  o.youngs_modulus_pa = 1e5;
  const SensorSpec s;
  SimConfig c;
  c.peak_force_n = peak_force_that_fits(o, s);
  c.seed = 11;
  const auto f = extract_contact_features(simulate_grasp(o, c, s));
  const double e = fit_hertz_mdr(f, MaterialAssumptions{0.4, s}).value_pa;
  EXPECT_LT(std::abs(std::log10(e / 1e5)), std::log10(3.0));
}

TEST(Hertz, NoiselessSoftSphereWithinFivePercent) {
  SimObject o;
  o.youngs_modulus_pa = 1e5;
  const SensorSpec s;
  SimConfig c = SimConfig{}.noiseless();
  c.peak_force_n = peak_force_that_fits(o, s);
  ContactOptions opt;
  opt.mask_threshold_mm = 0.0;
  const auto f = extract_contact_features(simulate_grasp(o, c, s), opt);
  EXPECT_NEAR(fit_hertz_mdr(f, MaterialAssumptions{0.4, s}).value_pa / 1e5, 1.0, 0.05);
}

TEST(Calibration, IdentityDefaultAndJson) {
  Calibration c;
  EXPECT_TRUE(c.is_identity());
  EXPECT_EQ(c.apply(5.5), 5.5);
  const Calibration d = Calibration::from_json(nlohmann::json{{"scale", 0.5}, {"offset", 2.0}});
  EXPECT_DOUBLE_EQ(d.apply(6.0), 5.0);
  EXPECT_THROW(Calibration::from_json(nlohmann::json{{"scale", 1}}), Error);
}

TEST(Calibration, FitsAffineMap) {
  const std::vector<double> pred{4, 5, 6, 7};
  std::vector<double> truth;
  for (double p : pred) truth.push_back(0.8 * p + 1.1);
  const Calibration c = fit_calibration(pred, truth);
  EXPECT_NEAR(c.scale, 0.8, 1e-12);
  EXPECT_NEAR(c.offset, 1.1, 1e-12);
}

TEST(Calibration, AppliedToHertzOnly) {
  const SensorSpec s;
  MaterialAssumptions m;
  const auto f = exact_series(2e5, 0.02, s);
  const auto plain = fit_hertz_mdr(f, m);
  const auto shifted = fit_hertz_mdr(f, m, HertzOptions{Calibration{1.0, 0.5}});
  EXPECT_NEAR(shifted.log10_value - plain.log10_value, 0.5, 1e-12);
}

namespace {

GraspSequence linear_spring(double k) {
  SensorSpec s;
  s.pixels_x = 7;
  s.pixels_y = 5;
  s.width_mm = 7;
  s.height_mm = 5;
  std::vector<TactileFrame> frames;
  std::vector<double> force;
  std::vector<double> width;
  for (int i = 0; i < 10; ++i) {
    frames.push_back(TactileFrame::zeros(i * 0.1, 7, 5));
    const double closure = 1e-3 * i;
    width.push_back(0.05 - closure);
    force.push_back(1.0 + k * closure);
  }
  return GraspSequence(s, std::move(frames), std::move(force), std::move(width));
}

}  // namespace

TEST(Hooke, ExactSpring) {
  const HookeFit h = fit_hooke_baseline(linear_spring(1000.0));
  EXPECT_NEAR(h.stiffness_n_per_m, 1000.0, 1e-9);
  EXPECT_GT(h.pseudo_modulus_pa, 0.0);
}

TEST(Hooke, ConstantWidthIsDegenerate) {
  SensorSpec s;
  s.pixels_x = 7;
  s.pixels_y = 5;
  s.width_mm = 7;
  s.height_mm = 5;
  std::vector<TactileFrame> frames{TactileFrame::zeros(0, 7, 5), TactileFrame::zeros(1, 7, 5),
                                   TactileFrame::zeros(2, 7, 5)};
  GraspSequence g(s, frames, {1, 2, 3}, {0.05, 0.05, 0.05});
  EXPECT_EQ(kind_of([&] { fit_hooke_baseline(g); }), ErrorKind::DegenerateFit);
}

TEST(Hooke, PseudoModulusOnlyTracksSoftObjects) {
  const SensorSpec s;
  auto err = [&s](double e) {
    SimObject o;
    o.youngs_modulus_pa = e;
    SimConfig c = SimConfig{}.noiseless();
    c.peak_force_n = peak_force_that_fits(o, s);
    return std::abs(std::log10(fit_hooke_baseline(simulate_grasp(o, c, s)).pseudo_modulus_pa / e));
  };
  EXPECT_LT(err(3e4), 1.0);
  EXPECT_GT(err(1e9), 1.0);
}
