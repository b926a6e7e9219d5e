#pragma once

// Grasp record: `manifest.json` + `depth.bin`, stored either as a directory
// or as a zip archive with the same two entries.
//
// depth.bin holds frame_count * pixels_y * pixels_x float32 little-endian
// values (mm), frames in time order, each frame row-major.

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tacmod/core/io.hpp"
#include "tacmod/core/types.hpp"
#include "tacmod/core/zip.hpp"

namespace tacmod {

inline constexpr int kGraspRecordVersion = 1;
inline constexpr const char* kManifestName = "manifest.json";
inline constexpr const char* kDepthName = "depth.bin";

struct RecordFiles {
  std::string manifest_json;
  io::Bytes depth_bin;
};

inline RecordFiles encode_grasp_record(const GraspSequence& seq) {
  using nlohmann::json;
  const SensorSpec& s = seq.sensor();
  std::vector<double> timestamps;
  timestamps.reserve(seq.size());
  for (const auto& f : seq.frames()) timestamps.push_back(f.timestamp_s());

  json manifest;
  manifest["version"] = kGraspRecordVersion;
  manifest["frame_count"] = seq.size();
  manifest["pixels_x"] = s.pixels_x;
  manifest["pixels_y"] = s.pixels_y;
  manifest["sensor"] = {{"E_pa", s.youngs_modulus_pa},
                        {"nu", s.poisson_ratio},
                        {"width_mm", s.width_mm},
                        {"height_mm", s.height_mm}};
  manifest["timestamps_s"] = timestamps;
  manifest["force_n"] = seq.force_n();
  manifest["width_m"] = seq.width_m();
  manifest["label_pa"] = seq.label_pa() ? json(*seq.label_pa()) : json(nullptr);
  manifest["metadata"] = json::object();
  for (const auto& [k, v] : seq.metadata()) manifest["metadata"][k] = v;

  RecordFiles files;
  files.manifest_json = manifest.dump(2) + "\n";
  files.depth_bin.reserve(seq.size() * s.pixels_x * s.pixels_y * 4);
  for (const auto& f : seq.frames()) {
    for (float v : f.depth_mm()) io::append_f32_le(files.depth_bin, v);
  }
  return files;
}

namespace detail {

template <typename T>
T manifest_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) fail(ErrorKind::MalformedManifest, std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::MalformedManifest, std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline GraspSequence decode_grasp_record(const RecordFiles& files) {
  using nlohmann::json;
  json manifest;
  try {
    manifest = json::parse(files.manifest_json);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::MalformedManifest, std::string("manifest is not valid JSON: ") + e.what());
  }
  require(manifest.is_object(), ErrorKind::MalformedManifest, "manifest must be a JSON object");
  require(manifest.contains("version") && manifest["version"].is_number_integer(), ErrorKind::MalformedManifest,
          "manifest lacks an integer version");
  const int version = manifest["version"].get<int>();
  require(version == kGraspRecordVersion, ErrorKind::VersionMismatch,
          "unsupported grasp record version " + std::to_string(version));

  const auto frame_count = detail::manifest_field<std::size_t>(manifest, "frame_count");
  SensorSpec sensor;
  sensor.pixels_x = detail::manifest_field<std::size_t>(manifest, "pixels_x");
  sensor.pixels_y = detail::manifest_field<std::size_t>(manifest, "pixels_y");
  const json sensor_json = detail::manifest_field<json>(manifest, "sensor");
  sensor.youngs_modulus_pa = detail::manifest_field<double>(sensor_json, "E_pa");
  sensor.poisson_ratio = detail::manifest_field<double>(sensor_json, "nu");
  sensor.width_mm = detail::manifest_field<double>(sensor_json, "width_mm");
  sensor.height_mm = detail::manifest_field<double>(sensor_json, "height_mm");

  const auto timestamps = detail::manifest_field<std::vector<double>>(manifest, "timestamps_s");
  auto force = detail::manifest_field<std::vector<double>>(manifest, "force_n");
  auto width = detail::manifest_field<std::vector<double>>(manifest, "width_m");
  require(timestamps.size() == frame_count && force.size() == frame_count && width.size() == frame_count,
          ErrorKind::MalformedManifest, "per-frame arrays disagree with frame_count");

  std::optional<double> label;
  const json label_json = detail::manifest_field<json>(manifest, "label_pa");
  if (!label_json.is_null()) {
    require(label_json.is_number(), ErrorKind::MalformedManifest, "label_pa must be a number or null");
    label = label_json.get<double>();
  }
  Metadata metadata;
  const json meta_json = detail::manifest_field<json>(manifest, "metadata");
  require(meta_json.is_object(), ErrorKind::MalformedManifest, "metadata must be an object");
  for (const auto& [k, v] : meta_json.items()) metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();

  const std::size_t per_frame = sensor.pixels_x * sensor.pixels_y;
  const std::size_t expected = frame_count * per_frame * 4;
  require(files.depth_bin.size() >= expected, ErrorKind::TruncatedPayload,
          "depth payload holds " + std::to_string(files.depth_bin.size()) + " bytes, manifest implies " +
              std::to_string(expected));
  require(files.depth_bin.size() == expected, ErrorKind::MalformedManifest,
          "depth payload is longer than the manifest implies");

  std::vector<TactileFrame> frames;
  frames.reserve(frame_count);
  const std::uint8_t* p = files.depth_bin.data();
  for (std::size_t i = 0; i < frame_count; ++i) {
    std::vector<float> depth(per_frame);
    for (std::size_t k = 0; k < per_frame; ++k, p += 4) depth[k] = io::load_f32_le(p);
    frames.emplace_back(timestamps[i], sensor.pixels_x, sensor.pixels_y, std::move(depth));
  }
  return GraspSequence(sensor, std::move(frames), std::move(force), std::move(width), label, std::move(metadata));
}

inline bool is_zip_path(const std::filesystem::path& p) { return p.extension() == ".zip"; }

/// Writes a directory, or a zip archive when `destination` ends in ".zip".
inline void write_grasp_record(const GraspSequence& seq, const std::filesystem::path& destination) {
  namespace fs = std::filesystem;
  const RecordFiles files = encode_grasp_record(seq);
  io::Bytes manifest(files.manifest_json.begin(), files.manifest_json.end());
  if (is_zip_path(destination)) {
    if (destination.has_parent_path()) fs::create_directories(destination.parent_path());
    io::write_bytes(destination, zip::build({{kManifestName, manifest}, {kDepthName, files.depth_bin}}));
    return;
  }
  std::error_code ec;
  fs::create_directories(destination, ec);
  require(!ec && fs::is_directory(destination), ErrorKind::Io, "cannot create directory " + destination.string());
  io::write_bytes(destination / kDepthName, files.depth_bin);
  io::write_bytes(destination / kManifestName, manifest);
}

inline GraspSequence read_grasp_record(const std::filesystem::path& source) {
  namespace fs = std::filesystem;
  require(fs::exists(source), ErrorKind::PathMissing, "no grasp record at " + source.string());
  RecordFiles files;
  if (fs::is_directory(source)) {
    files.manifest_json = io::read_text(source / kManifestName);
    files.depth_bin = io::read_bytes(source / kDepthName);
  } else {
    auto entries = zip::parse(io::read_bytes(source));
    auto m = entries.find(kManifestName);
    auto d = entries.find(kDepthName);
    require(m != entries.end(), ErrorKind::MalformedManifest, "archive lacks manifest.json");
    require(d != entries.end(), ErrorKind::TruncatedPayload, "archive lacks depth.bin");
    files.manifest_json.assign(m->second.begin(), m->second.end());
    files.depth_bin = std::move(d->second);
  }
  return decode_grasp_record(files);
}

/// True when `p` looks like a grasp record (directory with a manifest, or zip).
inline bool is_grasp_record(const std::filesystem::path& p) {
  namespace fs = std::filesystem;
  if (fs::is_directory(p)) return fs::exists(p / kManifestName);
  return fs::is_regular_file(p) && is_zip_path(p);
}

/// Record paths directly under `root`, sorted by name.
inline std::vector<std::filesystem::path> list_grasp_records(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  require(fs::is_directory(root), ErrorKind::PathMissing, "not a directory: " + root.string());
  std::vector<fs::path> out;
  if (is_grasp_record(root)) return {root};
  for (const auto& entry : fs::directory_iterator(root)) {
    if (is_grasp_record(entry.path())) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace tacmod
