#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "tacmod/core/error.hpp"
#include "tacmod/core/fit.hpp"
#include "tacmod/core/types.hpp"

namespace tacmod {

inline constexpr double kDefaultMaskThresholdMm = 0.1;
inline constexpr double kDefaultContactForceN = 0.75;
inline constexpr double kDefaultMonotoneTolerance = 0.05;

/// How the apparent object radius is obtained from contact growth.
enum class RadiusMode {
  growth,     // one R per grasp: slope of a^2 against per-finger closure
  per_frame,  // R(t) = a(t)^2 / closure(t), frames at zero closure are undefined
  median,     // median of the per-frame values, broadcast to every frame
};

struct ContactOptions {
  double mask_threshold_mm = kDefaultMaskThresholdMm;
  double contact_force_n = kDefaultContactForceN;
  double monotone_tolerance = kDefaultMonotoneTolerance;
  RadiusMode radius_mode = RadiusMode::growth;
};

struct ContactMask {
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::vector<std::uint8_t> cells;

  std::size_t count() const { return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), 1)); }
  bool at(std::size_t r, std::size_t c) const { return cells[r * cols + c] != 0; }
};

/// Cell is in contact iff depth > threshold (strict).
inline ContactMask contact_mask(const TactileFrame& frame, double threshold_mm = kDefaultMaskThresholdMm) {
  ContactMask mask{frame.cols(), frame.rows(), std::vector<std::uint8_t>(frame.depth_mm().size(), 0)};
  const auto& d = frame.depth_mm();
  for (std::size_t i = 0; i < d.size(); ++i) mask.cells[i] = static_cast<double>(d[i]) > threshold_mm ? 1 : 0;
  return mask;
}

inline std::size_t contact_pixel_count(const TactileFrame& frame, double threshold_mm) {
  std::size_t n = 0;
  for (float v : frame.depth_mm()) n += static_cast<double>(v) > threshold_mm ? 1 : 0;
  return n;
}

/// Contact area in m^2: masked cell count times pixel pitch squared.
inline double contact_area(const TactileFrame& frame, const SensorSpec& sensor,
                           double threshold_mm = kDefaultMaskThresholdMm) {
  const double pitch = sensor.pixel_pitch_m();
  return static_cast<double>(contact_pixel_count(frame, threshold_mm)) * pitch * pitch;
}

/// Largest depth in the contact region, in m; 0 when nothing is in contact.
inline double max_depth(const TactileFrame& frame, double threshold_mm = kDefaultMaskThresholdMm) {
  float best = 0.0f;
  bool any = false;
  for (float v : frame.depth_mm()) {
    if (static_cast<double>(v) > threshold_mm) {
      best = any ? std::max(best, v) : v;
      any = true;
    }
  }
  return any ? static_cast<double>(best) * 1e-3 : 0.0;
}

/// First frame whose force exceeds the threshold; that frame is t = 0.
inline std::size_t detect_first_contact(const GraspSequence& seq, double force_threshold_n = kDefaultContactForceN) {
  const auto& f = seq.force_n();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] > force_threshold_n) return i;
  }
  fail(ErrorKind::NoContact, "force never exceeds " + std::to_string(force_threshold_n) + " N");
}

struct IndexRange {
  std::size_t first = 0;
  std::size_t last = 0;  // inclusive

  std::size_t size() const { return last - first + 1; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Loading window from t0 to the first peak of force. A drop below the
/// running maximum larger than `tolerance * peak` marks the grasp as
/// non-monotonic.
inline IndexRange clip_loading_window(std::span<const double> force, std::size_t t0,
                                      double tolerance = kDefaultMonotoneTolerance) {
  require(t0 < force.size(), ErrorKind::InvalidValue, "first-contact index out of range");
  std::size_t peak = t0;
  for (std::size_t i = t0 + 1; i < force.size(); ++i) {
    if (force[i] > force[peak]) peak = i;
  }
  const double allowed = tolerance * std::abs(force[peak]);
  double running = force[t0];
  for (std::size_t i = t0 + 1; i <= peak; ++i) {
    require(running - force[i] <= allowed, ErrorKind::NonMonotonicLoading,
            "force drops by " + std::to_string(running - force[i]) + " N inside the loading window");
    running = std::max(running, force[i]);
  }
  IndexRange range{t0, peak};
  require(range.size() >= 2, ErrorKind::WindowTooShort, "loading window has fewer than two frames");
  return range;
}

inline IndexRange clip_loading_window(const GraspSequence& seq, std::size_t t0,
                                      double tolerance = kDefaultMonotoneTolerance) {
  return clip_loading_window(std::span<const double>(seq.force_n()), t0, tolerance);
}

struct StressStrain {
  std::vector<double> stress_pa;
  std::vector<double> strain;
};

/// eps(t) relative to index 0; exactly 0 there.
inline std::vector<double> strain_series(std::span<const double> width_m, std::span<const double> depth_m) {
  std::vector<double> eps(width_m.size(), 0.0);
  if (width_m.empty()) return eps;
  const double ref = width_m[0] + 2.0 * depth_m[0];
  for (std::size_t i = 1; i < width_m.size(); ++i) eps[i] = ((width_m[i] + 2.0 * depth_m[i]) - ref) / ref;
  return eps;
}

/// sigma = F / A, eps = ((w + 2d) - (w0 + 2d0)) / (w0 + 2d0) with index 0 as
/// the reference. Compression gives eps < 0.
inline StressStrain stress_strain(std::span<const double> force_n, std::span<const double> area_m2,
                                  std::span<const double> width_m, std::span<const double> depth_m) {
  const std::size_t n = force_n.size();
  require(area_m2.size() == n && width_m.size() == n && depth_m.size() == n, ErrorKind::LengthMismatch,
          "stress/strain inputs differ in length");
  require(n >= 1, ErrorKind::WindowTooShort, "empty window");
  StressStrain out;
  out.stress_pa.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    require(area_m2[i] > 0.0, ErrorKind::ZeroContactArea, "zero contact area at window frame " + std::to_string(i));
    out.stress_pa[i] = force_n[i] / area_m2[i];
  }
  out.strain = strain_series(width_m, depth_m);
  return out;
}

/// R = a^2 / delta_w.
inline double apparent_radius(double contact_radius_m, double delta_w_m) {
  require(delta_w_m > 0.0, ErrorKind::DegenerateGeometry, "gripper has not closed since contact");
  return contact_radius_m * contact_radius_m / delta_w_m;
}

/// Per-frame contact quantities over the clipped loading window.
struct ContactFeatureSeries {
  std::size_t t0_index = 0;
  IndexRange window;
  std::vector<double> area_m2;
  std::vector<double> max_depth_m;
  std::vector<double> contact_radius_m;
  std::vector<double> apparent_radius_m;  // NaN where undefined
  std::vector<double> stress_pa;          // NaN where the area is zero
  std::vector<double> strain;
  std::vector<double> force_n;
  std::vector<double> width_m;
  std::vector<double> closure_m;  // w(t0) - w(t), both fingers together

  std::size_t size() const { return force_n.size(); }
};

namespace detail {

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

inline std::vector<double> radius_series(const std::vector<double>& a, const std::vector<double>& closure,
                                         RadiusMode mode) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::size_t n = a.size();
  std::vector<double> r(n, nan);
  // Each finger advances half of the total closure.
  std::vector<double> per_frame(n, nan);
  std::vector<double> defined;
  for (std::size_t i = 0; i < n; ++i) {
    if (closure[i] > 0.0 && a[i] > 0.0) {
      per_frame[i] = apparent_radius(a[i], 0.5 * closure[i]);
      defined.push_back(per_frame[i]);
    }
  }
  switch (mode) {
    case RadiusMode::per_frame:
      return per_frame;
    case RadiusMode::median:
      if (!defined.empty()) std::fill(r.begin(), r.end(), median_of(defined));
      return r;
    case RadiusMode::growth: {
      std::vector<double> x;
      std::vector<double> y;
      for (std::size_t i = 0; i < n; ++i) {
        if (a[i] > 0.0) {
          x.push_back(0.5 * closure[i]);
          y.push_back(a[i] * a[i]);
        }
      }
      if (x.size() < 2) return r;
      try {
        const LinearFit fit = fit_affine(x, y);
        // The slope is d(a^2)/d(delta): the same a^2 / delta relation applied to
        // increments, insensitive to where contact actually began.
        if (fit.slope > 0.0) std::fill(r.begin(), r.end(), fit.slope);
      } catch (const Error&) {
      }
      return r;
    }
  }
  return r;
}

}  // namespace detail

inline ContactFeatureSeries extract_contact_features(const GraspSequence& seq, const ContactOptions& options = {}) {
  ContactFeatureSeries out;
  out.t0_index = detect_first_contact(seq, options.contact_force_n);
  out.window = clip_loading_window(seq, out.t0_index, options.monotone_tolerance);

  const double w0 = seq.width_m()[out.window.first];
  for (std::size_t i = out.window.first; i <= out.window.last; ++i) {
    const TactileFrame& frame = seq.frames()[i];
    const double area = contact_area(frame, seq.sensor(), options.mask_threshold_mm);
    out.area_m2.push_back(area);
    out.max_depth_m.push_back(max_depth(frame, options.mask_threshold_mm));
    out.contact_radius_m.push_back(std::sqrt(area / std::numbers::pi));
    out.force_n.push_back(seq.force_n()[i]);
    out.width_m.push_back(seq.width_m()[i]);
    out.closure_m.push_back(w0 - seq.width_m()[i]);
  }
  out.apparent_radius_m = detail::radius_series(out.contact_radius_m, out.closure_m, options.radius_mode);

  const std::size_t n = out.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.stress_pa.assign(n, nan);
  for (std::size_t i = 0; i < n; ++i) {
    if (out.area_m2[i] > 0.0) out.stress_pa[i] = out.force_n[i] / out.area_m2[i];
  }
  out.strain = strain_series(out.width_m, out.max_depth_m);
  return out;
}

}  // namespace tacmod
