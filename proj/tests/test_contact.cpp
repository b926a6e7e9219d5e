#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "tacmod/contact/features.hpp"
#include "tacmod/sim/simulate.hpp"

using namespace tacmod;

namespace {

SensorSpec pitch_sensor(std::size_t nx, std::size_t ny, double pitch_mm) {
  SensorSpec s;
  s.pixels_x = nx;
  s.pixels_y = ny;
  s.width_mm = pitch_mm * static_cast<double>(nx);
  s.height_mm = pitch_mm * static_cast<double>(ny);
  return s;
}

GraspSequence force_only(const std::vector<double>& force) {
  const SensorSpec s = pitch_sensor(2, 2, 1.0);
  std::vector<TactileFrame> frames;
  std::vector<double> width;
  for (std::size_t i = 0; i < force.size(); ++i) {
    frames.push_back(TactileFrame::uniform(static_cast<double>(i), 2, 2, 0.01f * static_cast<float>(i)));
    width.push_back(0.05 - 0.001 * static_cast<double>(i));
  }
  return GraspSequence(s, std::move(frames), force, width);
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no tacmod::Error thrown";
  return ErrorKind::InvariantViolation;
}

}  // namespace

TEST(ContactMask, ZeroAndUniformFrames) {
  const auto zero = contact_mask(TactileFrame::zeros(0, 5, 4));
  EXPECT_EQ(std::count(zero.cells.begin(), zero.cells.end(), true), 0);
  const auto full = contact_mask(TactileFrame::uniform(0, 5, 4, 0.2f));
  EXPECT_EQ(std::count(full.cells.begin(), full.cells.end(), true), 20);
}

TEST(ContactMask, ThresholdIsStrict) {
  std::vector<float> d(4, 0.0f);
  d[1] = 0.125f;
  d[2] = std::nextafter(0.125f, 1.0f);
  const auto m = contact_mask(TactileFrame(0, 2, 2, d), 0.125);
  EXPECT_FALSE(m.cells[1]);
  EXPECT_TRUE(m.cells[2]);
}

TEST(ContactArea, HundredCellsAtTenthMillimetre) {
  const SensorSpec s = pitch_sensor(20, 10, 0.1);
  std::vector<float> d(200, 0.0f);
  for (std::size_t i = 0; i < 100; ++i) d[i] = 0.5f;
  EXPECT_NEAR(contact_area(TactileFrame(0, 20, 10, d), s), 1e-6, 1e-18);
  EXPECT_EQ(contact_area(TactileFrame::zeros(0, 20, 10), s), 0.0);
}

TEST(ContactArea, ThresholdIsMonotone) {
  SimObject o;
  const SensorSpec s;
  SimConfig c = SimConfig{}.noiseless();
  c.peak_force_n = 5.0;
  const auto g = simulate_grasp(o, c, s);
  const TactileFrame& f = g.frames().back();
  double prev = contact_area(f, s, 0.0);
  for (double t = 0.05; t < 2.0; t += 0.05) {
    const double a = contact_area(f, s, t);
    EXPECT_LE(a, prev);
    prev = a;
  }
}

TEST(MaxDepth, ZeroAndUniform) {
  EXPECT_EQ(max_depth(TactileFrame::zeros(0, 3, 3)), 0.0);
  EXPECT_DOUBLE_EQ(max_depth(TactileFrame::uniform(0, 3, 3, 0.5f)), 5e-4);
}

TEST(FirstContact, Examples) {
  EXPECT_EQ(detect_first_contact(force_only({0, 0.5, 1.0, 5.0})), 2u);
  EXPECT_EQ(detect_first_contact(force_only({0.76, 2, 3})), 0u);
  EXPECT_EQ(kind_of([] { detect_first_contact(force_only({0, 0, 0})); }), ErrorKind::NoContact);
  // 0.75 itself is not contact.
  EXPECT_EQ(detect_first_contact(force_only({0.75, 0.8})), 1u);
}

TEST(LoadingWindow, Examples) {
  const std::vector<double> a{1, 2, 3, 4, 3};
  const IndexRange r = clip_loading_window(a, 0);
  EXPECT_EQ(r.first, 0u);
  EXPECT_EQ(r.last, 3u);
  EXPECT_EQ(kind_of([] { clip_loading_window(std::vector<double>{1, 3, 2, 4}, 0); }),
            ErrorKind::NonMonotonicLoading);
  EXPECT_EQ(kind_of([] { clip_loading_window(std::vector<double>{4, 3, 2}, 0); }), ErrorKind::WindowTooShort);
}

TEST(LoadingWindow, SmallDipWithinTolerance) {
  // 0.1 N dip against a 10 N peak stays within 5%.
  const IndexRange r = clip_loading_window(std::vector<double>{1, 5, 4.9, 10, 9}, 0);
  EXPECT_EQ(r.last, 3u);
}

TEST(StressStrain, Examples) {
  const std::vector<double> f{1.0, 2.0};
  const std::vector<double> area{1e-4, 1e-4};
  const std::vector<double> w{0.05, 0.05};
  const std::vector<double> d{1e-3, 1e-3};
  const StressStrain ss = stress_strain(f, area, w, d);
  EXPECT_DOUBLE_EQ(ss.stress_pa[0], 1e4);
  EXPECT_DOUBLE_EQ(ss.strain[1], 0.0);
}

TEST(StressStrain, HandEvaluatedStrain) {
  // ((w + 2d) - (w0 + 2d0)) / (w0 + 2d0) with w0 = 0.05, d0 = 0, w = 0.045, d = 5e-4.
  const std::vector<double> w{0.05, 0.045};
  const std::vector<double> d{0.0, 5e-4};
  const auto eps = strain_series(w, d);
  EXPECT_NEAR(eps[1], -0.08, 1e-15);
}

TEST(ApparentRadius, Examples) {
  EXPECT_DOUBLE_EQ(apparent_radius(1e-3, 1e-3), 1e-3);
  EXPECT_EQ(kind_of([] { apparent_radius(1e-3, 0.0); }), ErrorKind::DegenerateGeometry);
}

TEST(SimulatedFrame, DiscAreaNearPiASquared) {
  // Parabolic cap profile so the contact edge is sharp. The cap meets the
  // surface at sqrt(2 R d); forces are picked so that spans 20-100 pitches.
  const SensorSpec s = pitch_sensor(301, 301, 0.1);
  for (double a_px : {20.0, 35.5, 60.0, 100.0}) {
    const double a = a_px * s.pixel_pitch_m();
    SimObject o;
    o.radius_m = 0.02;
    SimConfig c = SimConfig{}.noiseless();
    c.profile = DepthProfile::parabolic_cap;
    c.peak_force_n = hertz::force(a * a / o.radius_m, sim_aggregate_modulus(o, s), o.radius_m);
    std::vector<SimFrameState> states;
    const auto g = simulate_grasp(o, c, s, &states);
    const double disc = 2.0 * o.radius_m * states.back().depth_m;
    ASSERT_GT(disc, 100.0 * s.pixel_pitch_m() * s.pixel_pitch_m());
    const double area = contact_area(g.frames().back(), s, 0.0);
    EXPECT_NEAR(area / (std::numbers::pi * disc), 1.0, 0.02) << a_px;
  }
}

TEST(SimulatedFrame, ApexDepthReadBack) {
  std::vector<float> d(121, 0.0f);
  d[60] = 0.3f;
  EXPECT_NEAR(max_depth(TactileFrame(0, 11, 11, d)), 3e-4, 1e-10);
}

TEST(Features, InvariantsOnNoiselessGrasp) {
  SimObject o;
  o.youngs_modulus_pa = 3e5;
  const SensorSpec s;
  SimConfig c = SimConfig{}.noiseless();
  c.peak_force_n = 10.0;
  const auto g = simulate_grasp(o, c, s);
  const auto f = extract_contact_features(g);
  ASSERT_GE(f.size(), 2u);
  for (std::size_t i = 0; i < f.size(); ++i) {
    EXPECT_GE(f.area_m2[i], 0.0);
    EXPECT_GE(f.max_depth_m[i], 0.0);
    EXPECT_NEAR(f.contact_radius_m[i], std::sqrt(f.area_m2[i] / std::numbers::pi),
                1e-12 * f.contact_radius_m[i]);
    if (i > 0) {
      EXPECT_GE(f.force_n[i], f.force_n[i - 1]);
    }
    if (f.area_m2[i] > 0.0) {
      EXPECT_GT(f.stress_pa[i], 0.0);
    }
    EXPECT_LE(f.strain[i], 0.0);
  }
}

TEST(Features, RecoversSphereRadius) {
  SimObject o;
  o.radius_m = 0.02;
  o.youngs_modulus_pa = 1e6;
  const SensorSpec s;
  SimConfig c = SimConfig{}.noiseless();
  c.peak_force_n = peak_force_that_fits(o, s);
  const auto f = extract_contact_features(simulate_grasp(o, c, s));
  const std::size_t mid = f.size() / 2;
  EXPECT_NEAR(f.apparent_radius_m[mid] / o.radius_m, 1.0, 0.10);

  ContactOptions per_frame;
  per_frame.radius_mode = RadiusMode::per_frame;
  per_frame.mask_threshold_mm = 0.0;
  per_frame.contact_force_n = 1e-9;
  const auto g = extract_contact_features(simulate_grasp(o, c, s), per_frame);
  // Closure counts from the first frame in contact, which is already up to one
  // frame of travel past touch-down, so early frames overestimate R.
  EXPECT_NEAR(g.apparent_radius_m.back() / o.radius_m, 1.0, 0.10);
  EXPECT_GT(g.apparent_radius_m.back(), 0.95 * o.radius_m);
}

TEST(Features, FlipInvariance) {
  SimObject o;
  o.youngs_modulus_pa = 2e6;
  const SensorSpec s;
  SimConfig c;
  c.peak_force_n = 12.0;
  c.seed = 4;
  const auto g = simulate_grasp(o, c, s);
  const auto base = extract_contact_features(g);
  for (auto [h, v] : {std::pair{true, false}, std::pair{false, true}, std::pair{true, true}}) {
    const auto f = extract_contact_features(g.flipped(h, v));
    EXPECT_EQ(f.area_m2, base.area_m2);
    EXPECT_EQ(f.max_depth_m, base.max_depth_m);
  }
}
