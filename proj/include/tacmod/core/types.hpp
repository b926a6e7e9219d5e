#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tacmod/core/error.hpp"

namespace tacmod {

/// Elastic and geometric properties of the tactile sensor gel.
/// Defaults describe a GelSight Wedge pad; every field may be overridden.
struct SensorSpec {
  double youngs_modulus_pa = 275'000.0;
  double poisson_ratio = 0.48;
  double width_mm = 35.0;
  double height_mm = 25.0;
  std::size_t pixels_x = 350;
  std::size_t pixels_y = 250;

  double pixel_pitch_mm() const { return width_mm / static_cast<double>(pixels_x); }
  double pixel_pitch_m() const { return pixel_pitch_mm() * 1e-3; }
  double area_m2() const { return width_mm * height_mm * 1e-6; }

  /// (1 - nu^2) / E of the gel, in 1/Pa.
  double compliance() const { return (1.0 - poisson_ratio * poisson_ratio) / youngs_modulus_pa; }

  void validate() const {
    require(std::isfinite(youngs_modulus_pa) && youngs_modulus_pa > 0.0, ErrorKind::InvariantViolation,
            "sensor Young's modulus must be positive");
    require(poisson_ratio > 0.0 && poisson_ratio < 0.5, ErrorKind::InvariantViolation,
            "sensor Poisson ratio must lie in (0, 0.5)");
    require(width_mm > 0.0 && height_mm > 0.0, ErrorKind::InvariantViolation, "sensor size must be positive");
    require(pixels_x > 0 && pixels_y > 0, ErrorKind::InvariantViolation, "sensor pixel counts must be positive");
    const double pitch_x = width_mm / static_cast<double>(pixels_x);
    const double pitch_y = height_mm / static_cast<double>(pixels_y);
    require(std::abs(pitch_x - pitch_y) <= 1e-9, ErrorKind::InvariantViolation, "sensor pixels must be square");
  }

  friend bool operator==(const SensorSpec&, const SensorSpec&) = default;
};

/// One depth map (mm, row-major, rows = pixels_y) captured at `timestamp_s`.
class TactileFrame {
 public:
  TactileFrame() = default;

  TactileFrame(double timestamp_s, std::size_t cols, std::size_t rows, std::vector<float> depth_mm)
      : timestamp_s_(timestamp_s), cols_(cols), rows_(rows), depth_mm_(std::move(depth_mm)) {
    require(std::isfinite(timestamp_s_), ErrorKind::InvariantViolation, "frame timestamp must be finite");
    require(depth_mm_.size() == cols_ * rows_, ErrorKind::InvariantViolation, "depth buffer size mismatch");
    for (float v : depth_mm_) {
      require(std::isfinite(v) && v >= 0.0f, ErrorKind::InvariantViolation,
              "depth values must be finite and non-negative");
    }
  }

  static TactileFrame zeros(double timestamp_s, std::size_t cols, std::size_t rows) {
    return TactileFrame(timestamp_s, cols, rows, std::vector<float>(cols * rows, 0.0f));
  }

  static TactileFrame uniform(double timestamp_s, std::size_t cols, std::size_t rows, float depth_mm) {
    return TactileFrame(timestamp_s, cols, rows, std::vector<float>(cols * rows, depth_mm));
  }

  double timestamp_s() const { return timestamp_s_; }
  std::size_t cols() const { return cols_; }
  std::size_t rows() const { return rows_; }
  const std::vector<float>& depth_mm() const { return depth_mm_; }
  float at(std::size_t row, std::size_t col) const { return depth_mm_[row * cols_ + col]; }

  /// Mirror columns (horizontal) and/or rows (vertical).
  TactileFrame flipped(bool horizontal, bool vertical) const {
    TactileFrame out = *this;
    for (std::size_t r = 0; r < rows_; ++r) {
      const std::size_t src_r = vertical ? rows_ - 1 - r : r;
      for (std::size_t c = 0; c < cols_; ++c) {
        const std::size_t src_c = horizontal ? cols_ - 1 - c : c;
        out.depth_mm_[r * cols_ + c] = depth_mm_[src_r * cols_ + src_c];
      }
    }
    return out;
  }

  friend bool operator==(const TactileFrame&, const TactileFrame&) = default;

 private:
  double timestamp_s_ = 0.0;
  std::size_t cols_ = 0;
  std::size_t rows_ = 0;
  std::vector<float> depth_mm_;
};

using Metadata = std::map<std::string, std::string>;

/// Synchronized frames, normal force (N) and gripper width (m) of one grasp.
/// Construction validates every invariant; instances are immutable.
class GraspSequence {
 public:
  GraspSequence(SensorSpec sensor, std::vector<TactileFrame> frames, std::vector<double> force_n,
                std::vector<double> width_m, std::optional<double> label_pa = std::nullopt, Metadata metadata = {})
      : sensor_(sensor),
        frames_(std::move(frames)),
        force_n_(std::move(force_n)),
        width_m_(std::move(width_m)),
        label_pa_(label_pa),
        metadata_(std::move(metadata)) {
    sensor_.validate();
    require(frames_.size() >= 2, ErrorKind::InvariantViolation, "a grasp needs at least two frames");
    require(force_n_.size() == frames_.size(), ErrorKind::InvariantViolation, "force count differs from frame count");
    require(width_m_.size() == frames_.size(), ErrorKind::InvariantViolation, "width count differs from frame count");
    for (std::size_t i = 0; i < frames_.size(); ++i) {
      const auto& f = frames_[i];
      require(f.cols() == sensor_.pixels_x && f.rows() == sensor_.pixels_y, ErrorKind::InvariantViolation,
              "frame dimensions differ from sensor pixel counts");
      if (i > 0) {
        require(f.timestamp_s() > frames_[i - 1].timestamp_s(), ErrorKind::InvariantViolation,
                "timestamps must be strictly increasing");
      }
      require(std::isfinite(force_n_[i]), ErrorKind::InvariantViolation, "force values must be finite");
      require(std::isfinite(width_m_[i]) && width_m_[i] > 0.0, ErrorKind::InvariantViolation,
              "width values must be positive");
    }
    if (label_pa_) {
      require(std::isfinite(*label_pa_) && *label_pa_ > 0.0, ErrorKind::InvariantViolation,
              "label must be a positive modulus");
    }
  }

  const SensorSpec& sensor() const { return sensor_; }
  const std::vector<TactileFrame>& frames() const { return frames_; }
  const std::vector<double>& force_n() const { return force_n_; }
  const std::vector<double>& width_m() const { return width_m_; }
  const std::optional<double>& label_pa() const { return label_pa_; }
  const Metadata& metadata() const { return metadata_; }
  std::size_t size() const { return frames_.size(); }

  std::string metadata_or(const std::string& key, std::string fallback) const {
    auto it = metadata_.find(key);
    return it == metadata_.end() ? std::move(fallback) : it->second;
  }

  /// Same grasp with every frame mirrored.
  GraspSequence flipped(bool horizontal, bool vertical) const {
    std::vector<TactileFrame> frames;
    frames.reserve(frames_.size());
    for (const auto& f : frames_) frames.push_back(f.flipped(horizontal, vertical));
    return GraspSequence(sensor_, std::move(frames), force_n_, width_m_, label_pa_, metadata_);
  }

  friend bool operator==(const GraspSequence&, const GraspSequence&) = default;

 private:
  SensorSpec sensor_;
  std::vector<TactileFrame> frames_;
  std::vector<double> force_n_;
  std::vector<double> width_m_;
  std::optional<double> label_pa_;
  Metadata metadata_;
};

enum class EstimateMethod { elastic, hertz, learned, hybrid };

constexpr std::string_view to_string(EstimateMethod m) noexcept {
  switch (m) {
    case EstimateMethod::elastic: return "elastic";
    case EstimateMethod::hertz: return "hertz";
    case EstimateMethod::learned: return "learned";
    case EstimateMethod::hybrid: return "hybrid";
  }
  return "unknown";
}

struct FitDiagnostics {
  double residual_norm = 0.0;
  std::size_t n_points = 0;
  bool clamped = false;      // value hit the [1 Pa, 1e13 Pa] bracket
  bool rigid_limit = false;  // fitted aggregate modulus was stiffer than a rigid object allows
};

/// A Young's modulus with the method that produced it.
struct ModulusEstimate {
  double value_pa = 1.0;
  double log10_value = 0.0;
  EstimateMethod method = EstimateMethod::elastic;
  FitDiagnostics diagnostics;

  static ModulusEstimate from_value(double value_pa, EstimateMethod method, FitDiagnostics diag = {}) {
    require(std::isfinite(value_pa) && value_pa > 0.0, ErrorKind::InvalidValue, "modulus must be positive");
    return ModulusEstimate{value_pa, std::log10(value_pa), method, diag};
  }

  static ModulusEstimate from_log10(double log10_value, EstimateMethod method, FitDiagnostics diag = {}) {
    return from_value(std::pow(10.0, log10_value), method, diag);
  }
};

}  // namespace tacmod
