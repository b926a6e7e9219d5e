#pragma once

// Durometer conversions between Shore A, Shore 00 and Young's modulus.
// Shore A uses Gent's relation; Shore 00 goes through a correspondence table
// to Shore A first.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "tacmod/core/error.hpp"
#include "tacmod/core/io.hpp"

namespace tacmod::shore {

enum class Scale { shore_a, shore_00 };

/// Repeated durometer readings of one object.
class ShoreMeasurement {
 public:
  ShoreMeasurement(Scale scale, std::vector<double> readings) : scale_(scale), readings_(std::move(readings)) {
    require(!readings_.empty() && readings_.size() <= 10, ErrorKind::InvariantViolation,
            "a measurement holds 1 to 10 readings");
    for (double r : readings_) {
      require(r >= 0.0 && r <= 100.0, ErrorKind::InvariantViolation, "readings must lie in [0, 100]");
    }
  }

  Scale scale() const { return scale_; }
  const std::vector<double>& readings() const { return readings_; }

 private:
  Scale scale_;
  std::vector<double> readings_;
};

/// Median reading; for an even count the lower of the two middle values.
inline double median_reading(const ShoreMeasurement& m) {
  std::vector<double> v = m.readings();
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

/// A converted value plus what happened on the way.
struct Conversion {
  double value = 0.0;
  bool clamped = false;
  bool near_singularity = false;
};

inline constexpr double kNearSingularShoreA = 99.0;

/// Gent: E = 0.0981 (56 + 7.62336 S) / (0.137505 (254 - 2.54 S)) MPa.
inline Conversion shore_a_to_modulus(double shore_a) {
  require(std::isfinite(shore_a), ErrorKind::InvalidValue, "hardness must be finite");
  require(shore_a < 100.0, ErrorKind::OutOfRange, "Shore A must be below 100");
  const double mpa = 0.0981 * (56.0 + 7.62336 * shore_a) / (0.137505 * (254.0 - 2.54 * shore_a));
  return Conversion{mpa * 1e6, false, shore_a > kNearSingularShoreA};
}

/// Closed-form inverse of Gent's relation; negative for moduli below E(0).
inline double modulus_to_shore_a_unclamped(double modulus_pa) {
  const double e = modulus_pa * 1e-6 * 0.137505 / 0.0981;
  return (254.0 * e - 56.0) / (7.62336 + 2.54 * e);
}

/// Inverse of shore_a_to_modulus, clamped to [0, 100).
inline Conversion modulus_to_shore_a(double modulus_pa) {
  require(modulus_pa > 0.0 && std::isfinite(modulus_pa), ErrorKind::InvalidValue, "modulus must be positive");
  const double s = modulus_to_shore_a_unclamped(modulus_pa);
  if (s < 0.0) return Conversion{0.0, true, false};
  return Conversion{s, false, s > kNearSingularShoreA};
}

struct Knot {
  double shore_00;
  double shore_a;
};

inline constexpr int kTableVersion = 1;

/// Same data as data/shore00_to_shore_a_v1.csv.
inline constexpr std::array<Knot, 10> kShore00Table{{
    {10, 0},
    {20, 1},
    {30, 3},
    {40, 6},
    {50, 10},
    {60, 15},
    {70, 22},
    {80, 32},
    {90, 45},
    {100, 62},
}};

/// Parses a correspondence CSV (comment lines start with '#', one header row).
inline std::vector<Knot> parse_table_csv(const std::string& text) {
  std::vector<Knot> knots;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    const auto comma = line.find(',');
    require(comma != std::string::npos, ErrorKind::MalformedManifest, "table row without a comma: " + line);
    try {
      knots.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
    } catch (const std::exception&) {
      fail(ErrorKind::MalformedManifest, "table row is not numeric: " + line);
    }
  }
  require(knots.size() >= 2, ErrorKind::MalformedManifest, "table needs at least two rows");
  for (std::size_t i = 1; i < knots.size(); ++i) {
    require(knots[i].shore_00 > knots[i - 1].shore_00 && knots[i].shore_a > knots[i - 1].shore_a,
            ErrorKind::MalformedManifest, "table must be strictly increasing in both columns");
  }
  return knots;
}

inline std::vector<Knot> load_table_csv(const std::filesystem::path& path) {
  return parse_table_csv(io::read_text(path));
}

namespace detail {

inline double lerp_segment(double x, double x0, double x1, double y0, double y1) {
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

}  // namespace detail

/// Piecewise-linear Shore 00 -> Shore A, extrapolating the end segments.
/// The result can be negative below the table's Shore A floor.
inline double shore00_to_shore_a_unclamped(double s00) {
  const auto& t = kShore00Table;
  std::size_t i = 1;
  while (i + 1 < t.size() && s00 > t[i].shore_00) ++i;
  return detail::lerp_segment(s00, t[i - 1].shore_00, t[i].shore_00, t[i - 1].shore_a, t[i].shore_a);
}

inline Conversion shore00_to_shore_a(double s00) {
  require(s00 >= 0.0 && s00 <= 100.0, ErrorKind::OutOfRange, "Shore 00 must lie in [0, 100]");
  const double a = shore00_to_shore_a_unclamped(s00);
  if (a < 0.0) return Conversion{0.0, true, false};
  return Conversion{a, false, false};
}

/// Inverse table lookup Shore A -> Shore 00 over the table's range.
inline Conversion shore_a_to_shore00(double shore_a) {
  const auto& t = kShore00Table;
  if (shore_a < t.front().shore_a) return Conversion{t.front().shore_00, true, false};
  if (shore_a > t.back().shore_a) return Conversion{t.back().shore_00, true, false};
  std::size_t i = 1;
  while (i + 1 < t.size() && shore_a > t[i].shore_a) ++i;
  return Conversion{detail::lerp_segment(shore_a, t[i - 1].shore_a, t[i].shore_a, t[i - 1].shore_00, t[i].shore_00),
                    false, false};
}

/// Shore 00 -> modulus through the table and Gent. The unclamped Shore A is
/// used so the map stays strictly increasing below the table floor.
inline Conversion shore00_to_modulus(double s00) {
  require(s00 >= 0.0 && s00 <= 100.0, ErrorKind::OutOfRange, "Shore 00 must lie in [0, 100]");
  return shore_a_to_modulus(shore00_to_shore_a_unclamped(s00));
}

inline constexpr double kInversionTolerance = 1e-3;

struct Inversion {
  Conversion result;
  int iterations = 0;
};

/// Bisection of shore00_to_modulus on [0, 100].
inline Inversion invert_shore00(double modulus_pa) {
  require(modulus_pa > 0.0 && std::isfinite(modulus_pa), ErrorKind::InvalidValue, "modulus must be positive");
  double lo = 0.0;
  double hi = 100.0;
  if (modulus_pa <= shore00_to_modulus(lo).value) return {Conversion{lo, true, false}, 0};
  if (modulus_pa >= shore00_to_modulus(hi).value) return {Conversion{hi, true, false}, 0};
  int it = 0;
  while (hi - lo > kInversionTolerance && it < 60) {
    const double mid = 0.5 * (lo + hi);
    if (shore00_to_modulus(mid).value < modulus_pa) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++it;
  }
  return {Conversion{0.5 * (lo + hi), false, false}, it};
}

inline Conversion modulus_to_shore00(double modulus_pa) { return invert_shore00(modulus_pa).result; }

}  // namespace tacmod::shore
