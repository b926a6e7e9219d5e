#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "tacmod/analytic/estimators.hpp"
#include "tacmod/core/error.hpp"
#include "tacmod/core/rng.hpp"
#include "tacmod/core/types.hpp"
#include "tacmod/sim/hertz.hpp"

namespace tacmod {

enum class ObjectShape { sphere };

struct SimObject {
  double youngs_modulus_pa = 1e5;
  double poisson = 0.4;
  double radius_m = 0.02;
  ObjectShape shape = ObjectShape::sphere;
  std::string name = "sphere";
  std::string material = "unknown";

  void validate() const {
    require(youngs_modulus_pa > 0.0 && std::isfinite(youngs_modulus_pa), ErrorKind::InvariantViolation,
            "object modulus must be positive");
    require(poisson > 0.0 && poisson < 0.5, ErrorKind::InvariantViolation, "object Poisson ratio must lie in (0, 0.5)");
    require(radius_m > 0.0 && std::isfinite(radius_m), ErrorKind::InvariantViolation, "object radius must be positive");
  }
};

enum class DepthProfile {
  mdr,            // u(r) = (1 - nu_s^2)/E_s q(r), the MDR line-load profile
  parabolic_cap,  // u(r) = d - r^2 / (2R), a rigid spherical cap pressed to depth d
};

struct SimConfig {
  double closing_speed_m_s = 0.0375;
  double frame_rate_hz = 30.0;
  double peak_force_n = 30.0;
  double hold_time_s = 0.5;
  double depth_noise_std_mm = 0.02;
  double force_noise_std_n = 0.1;
  double initial_gap_m = 0.004;  // total finger-to-surface gap before closing starts
  std::uint64_t seed = 0;
  DepthProfile profile = DepthProfile::mdr;

  void validate() const {
    require(closing_speed_m_s > 0.0 && frame_rate_hz > 0.0 && peak_force_n > 0.0, ErrorKind::InvariantViolation,
            "closing speed, frame rate and peak force must be positive");
    require(depth_noise_std_mm >= 0.0 && force_noise_std_n >= 0.0, ErrorKind::InvariantViolation,
            "noise standard deviations must be non-negative");
    require(hold_time_s >= 0.0 && initial_gap_m >= 0.0, ErrorKind::InvariantViolation,
            "hold time and gap must be non-negative");
  }

  SimConfig noiseless() const {
    SimConfig c = *this;
    c.depth_noise_std_mm = 0.0;
    c.force_noise_std_n = 0.0;
    return c;
  }
};

/// Pixel that holds the contact apex.
struct ApexPixel {
  std::size_t col;
  std::size_t row;
};

inline ApexPixel apex_pixel(const SensorSpec& sensor) { return {sensor.pixels_x / 2, sensor.pixels_y / 2}; }

/// Largest contact radius whose disc stays on the sensor around the apex pixel.
inline double max_contact_radius_m(const SensorSpec& sensor) {
  const ApexPixel c = apex_pixel(sensor);
  const std::size_t cells = std::min({c.col, sensor.pixels_x - 1 - c.col, c.row, sensor.pixels_y - 1 - c.row});
  return static_cast<double>(cells) * sensor.pixel_pitch_m();
}

inline double sim_aggregate_modulus(const SimObject& obj, const SensorSpec& sensor) {
  return aggregate_modulus(obj.youngs_modulus_pa, MaterialAssumptions{obj.poisson, sensor});
}

/// Highest force (capped at `cap_n`) whose contact disc fills at most `fill`
/// of the usable sensor radius and whose per-finger approach stays below
/// `max_approach_ratio` of the object radius.
inline double peak_force_that_fits(const SimObject& obj, const SensorSpec& sensor, double fill = 0.9,
                                   double cap_n = 30.0, double max_approach_ratio = 0.4) {
  const double a = fill * max_contact_radius_m(sensor);
  const double approach = std::min(a * a / obj.radius_m, max_approach_ratio * obj.radius_m);
  return std::min(cap_n, hertz::force(approach, sim_aggregate_modulus(obj, sensor), obj.radius_m));
}

namespace detail {

inline void rasterize(std::vector<float>& depth, const SensorSpec& sensor, DepthProfile profile, double p0,
                      double a, double d, double radius_m) {
  if (a <= 0.0) return;
  const ApexPixel c = apex_pixel(sensor);
  const double pitch = sensor.pixel_pitch_m();
  const double support = profile == DepthProfile::mdr ? a : std::sqrt(2.0 * radius_m * d);
  const auto reach = static_cast<std::ptrdiff_t>(std::ceil(support / pitch)) + 1;
  const auto nx = static_cast<std::ptrdiff_t>(sensor.pixels_x);
  const auto ny = static_cast<std::ptrdiff_t>(sensor.pixels_y);
  const auto cx = static_cast<std::ptrdiff_t>(c.col);
  const auto cy = static_cast<std::ptrdiff_t>(c.row);
  for (std::ptrdiff_t row = std::max<std::ptrdiff_t>(0, cy - reach); row <= std::min(ny - 1, cy + reach); ++row) {
    for (std::ptrdiff_t col = std::max<std::ptrdiff_t>(0, cx - reach); col <= std::min(nx - 1, cx + reach); ++col) {
      const double dx = static_cast<double>(col - cx) * pitch;
      const double dy = static_cast<double>(row - cy) * pitch;
      const double r = std::sqrt(dx * dx + dy * dy);
      double u = 0.0;
      if (profile == DepthProfile::mdr) {
        u = hertz::surface_profile(r, sensor, p0, a);
      } else {
        u = std::max(0.0, d - r * r / (2.0 * radius_m));
      }
      depth[static_cast<std::size_t>(row * nx + col)] = static_cast<float>(u * 1e3);
    }
  }
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

/// Noise-free state of the simulated contact at one frame.
struct SimFrameState {
  double width_m;
  double approach_m;  // per finger
  double force_n;
  double contact_radius_m;
  double depth_m;
};

/// Synthetic parallel grasp of a sphere: the gripper closes at constant speed
/// until the Hertz force reaches the peak, then holds. Both fingers advance by
/// half the closure; depth frames rasterize the axisymmetric MDR profile about
/// the apex pixel, plus optional Gaussian noise.
inline GraspSequence simulate_grasp(const SimObject& obj, const SimConfig& cfg, const SensorSpec& sensor,
                                    std::vector<SimFrameState>* states = nullptr, Metadata extra = {}) {
  obj.validate();
  cfg.validate();
  sensor.validate();
  const double aggregate = sim_aggregate_modulus(obj, sensor);
  const double peak_approach = hertz::approach_for_force(cfg.peak_force_n, aggregate, obj.radius_m);
  const double peak_a = hertz::contact_radius(peak_approach, obj.radius_m);
  require(peak_a <= max_contact_radius_m(sensor), ErrorKind::ObjectTooLarge,
          "contact radius " + std::to_string(peak_a) + " m at peak force does not fit on the sensor");

  require(peak_approach < obj.radius_m, ErrorKind::ObjectTooLarge,
          "peak force would press each finger deeper than the object radius");
  const double diameter = 2.0 * obj.radius_m;
  const double dt = 1.0 / cfg.frame_rate_hz;
  const auto hold_frames = static_cast<std::size_t>(std::llround(cfg.hold_time_s * cfg.frame_rate_hz));
  const std::size_t max_frames = 100000;

  std::vector<SimFrameState> trace;
  bool holding = false;
  std::size_t held = 0;
  for (std::size_t k = 0; k < max_frames; ++k) {
    SimFrameState s{};
    if (!holding) {
      s.width_m = diameter + cfg.initial_gap_m - cfg.closing_speed_m_s * dt * static_cast<double>(k);
      s.approach_m = std::max(0.0, 0.5 * (diameter - s.width_m));
      if (s.approach_m >= peak_approach) {
        s.approach_m = peak_approach;
        s.width_m = diameter - 2.0 * peak_approach;
        holding = true;
      }
    } else {
      s = trace.back();
      ++held;
    }
    trace.push_back(s);
    if (holding && held >= hold_frames) break;
  }
  require(holding, ErrorKind::InvalidValue, "grasp did not reach peak force");

  const CounterRng depth_noise(cfg.seed, 1);
  const CounterRng force_noise(cfg.seed, 2);
  const std::size_t npix = sensor.pixels_x * sensor.pixels_y;

  std::vector<TactileFrame> frames;
  std::vector<double> force;
  std::vector<double> width;
  frames.reserve(trace.size());
  for (std::size_t k = 0; k < trace.size(); ++k) {
    SimFrameState& s = trace[k];
    s.force_n = hertz::force(s.approach_m, aggregate, obj.radius_m);
    s.contact_radius_m = hertz::contact_radius(s.approach_m, obj.radius_m);
    s.depth_m = s.approach_m > 0.0
                    ? hertz::peak_depth(s.force_n, aggregate, obj.radius_m, s.contact_radius_m, sensor)
                    : 0.0;
    const double p0 = s.approach_m > 0.0 ? hertz::peak_pressure(s.force_n, s.contact_radius_m) : 0.0;

    std::vector<float> depth(npix, 0.0f);
    detail::rasterize(depth, sensor, cfg.profile, p0, s.contact_radius_m, s.depth_m, obj.radius_m);
    if (cfg.depth_noise_std_mm > 0.0) {
      // Pixels 2j and 2j+1 share one Box-Muller draw.
      const std::uint64_t base = static_cast<std::uint64_t>(k) * ((npix + 1) / 2);
      for (std::size_t i = 0; i < npix; i += 2) {
        const auto z = depth_noise.normal_pair(base + i / 2);
        depth[i] = static_cast<float>(std::max(0.0, depth[i] + cfg.depth_noise_std_mm * z.first));
        if (i + 1 < npix) depth[i + 1] = static_cast<float>(std::max(0.0, depth[i + 1] + cfg.depth_noise_std_mm * z.second));
      }
    }
    frames.emplace_back(dt * static_cast<double>(k), sensor.pixels_x, sensor.pixels_y, std::move(depth));
    force.push_back(s.force_n + cfg.force_noise_std_n * (cfg.force_noise_std_n > 0.0 ? force_noise.normal(k) : 0.0));
    width.push_back(s.width_m);
  }
  if (states) *states = trace;

  Metadata meta{{"object", obj.name},
                {"material", obj.material},
                {"shape", "sphere"},
                {"radius_m", detail::format_double(obj.radius_m)},
                {"poisson", detail::format_double(obj.poisson)},
                {"seed", std::to_string(cfg.seed)},
                {"source", "simulator"}};
  for (auto& [k, v] : extra) meta[k] = std::move(v);
  return GraspSequence(sensor, std::move(frames), std::move(force), std::move(width), obj.youngs_modulus_pa,
                       std::move(meta));
}

}  // namespace tacmod
