#pragma once

// Checkpoint layout: 8-byte magic "TACMODCK", u32 little-endian header
// length, UTF-8 JSON header, then every tensor as little-endian float32 in
// header order. The header records config, label range and tensor shapes.

#include <cstring>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "tacmod/core/error.hpp"
#include "tacmod/core/io.hpp"
#include "tacmod/core/types.hpp"
#include "tacmod/learn/model.hpp"

namespace tacmod::learn {

inline constexpr char kCheckpointMagic[8] = {'T', 'A', 'C', 'M', 'O', 'D', 'C', 'K'};
inline constexpr int kCheckpointVersion = 1;

inline nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"n_frames", c.n_frames},
          {"grid_rows", c.grid_rows},
          {"grid_cols", c.grid_cols},
          {"channels", c.channels},
          {"decoder1", c.decoder1},
          {"decoder2_hidden", c.decoder2_hidden},
          {"depth_scale_mm", c.depth_scale_mm},
          {"force_scale_n", c.force_scale_n},
          {"width_scale_m", c.width_scale_m},
          {"label_min", c.label_min},
          {"label_max", c.label_max},
          {"flags", {{"force_width", c.flags.force_width}, {"analytic", c.flags.analytic}}}};
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
  try {
    ModelConfig c;
    c.n_frames = j.at("n_frames").get<std::size_t>();
    c.grid_rows = j.at("grid_rows").get<std::size_t>();
    c.grid_cols = j.at("grid_cols").get<std::size_t>();
    c.channels = j.at("channels").get<std::array<std::size_t, 3>>();
    c.decoder1 = j.at("decoder1").get<std::array<std::size_t, 2>>();
    c.decoder2_hidden = j.at("decoder2_hidden").get<std::size_t>();
    c.depth_scale_mm = j.at("depth_scale_mm").get<double>();
    c.force_scale_n = j.at("force_scale_n").get<double>();
    c.width_scale_m = j.at("width_scale_m").get<double>();
    c.label_min = j.at("label_min").get<double>();
    c.label_max = j.at("label_max").get<double>();
    c.flags.force_width = j.at("flags").at("force_width").get<bool>();
    c.flags.analytic = j.at("flags").at("analytic").get<bool>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::MalformedManifest, std::string("bad model config: ") + e.what());
  }
}

inline io::Bytes encode_checkpoint(const ModelParameters& p) {
  p.validate();
  nlohmann::json header;
  header["version"] = kCheckpointVersion;
  header["config"] = config_to_json(p.config);
  header["dtype"] = "float32";
  nlohmann::json tensors = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& t : p.tensors) {
    tensors.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}});
    offset += t.size() * 4;
  }
  header["tensors"] = tensors;
  const std::string text = header.dump();

  io::Bytes out(std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  io::append_u32_le(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& t : p.tensors) {
    for (double v : t.data) io::append_f32_le(out, static_cast<float>(v));
  }
  return out;
}

inline ModelParameters decode_checkpoint(const io::Bytes& bytes) {
  require(bytes.size() >= 12 && std::memcmp(bytes.data(), kCheckpointMagic, 8) == 0, ErrorKind::MalformedManifest,
          "not a model checkpoint");
  const std::uint32_t header_len = io::load_u32_le(bytes.data() + 8);
  require(bytes.size() >= 12 + static_cast<std::size_t>(header_len), ErrorKind::TruncatedPayload,
          "checkpoint header is truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 12, bytes.begin() + 12 + header_len);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::MalformedManifest, std::string("checkpoint header is not JSON: ") + e.what());
  }
  require(header.value("version", 0) == kCheckpointVersion, ErrorKind::VersionMismatch,
          "unsupported checkpoint version");
  ModelParameters p = zero_parameters(config_from_json(header.at("config")));
  const std::size_t data_start = 12 + header_len;
  const auto& listed = header.at("tensors");
  require(listed.is_array() && listed.size() == p.tensors.size(), ErrorKind::MalformedManifest,
          "checkpoint tensor list does not match the model");
  std::size_t expected_end = data_start;
  for (std::size_t i = 0; i < p.tensors.size(); ++i) {
    Tensor& t = p.tensors[i];
    const auto& entry = listed[i];
    require(entry.at("name").get<std::string>() == t.name &&
                entry.at("shape").get<std::vector<std::size_t>>() == t.shape,
            ErrorKind::MalformedManifest, "checkpoint tensor " + t.name + " has an unexpected name or shape");
    const std::size_t off = data_start + entry.at("offset").get<std::size_t>();
    require(off + t.size() * 4 <= bytes.size(), ErrorKind::TruncatedPayload, "tensor " + t.name + " is truncated");
    for (std::size_t k = 0; k < t.size(); ++k) t.data[k] = io::load_f32_le(bytes.data() + off + 4 * k);
    expected_end = std::max(expected_end, off + t.size() * 4);
  }
  require(expected_end == bytes.size(), ErrorKind::MalformedManifest, "trailing bytes after checkpoint tensors");
  p.validate();
  return p;
}

inline void save_checkpoint(const ModelParameters& p, const std::filesystem::path& path) {
  io::write_bytes(path, encode_checkpoint(p));
}

inline ModelParameters load_checkpoint(const std::filesystem::path& path) {
  require(std::filesystem::exists(path), ErrorKind::PathMissing, "checkpoint not found: " + path.string());
  return decode_checkpoint(io::read_bytes(path));
}

/// Hybrid when the model sees analytic estimates, learned otherwise.
inline EstimateMethod checkpoint_method(const ModelParameters& p) {
  return p.config.flags.analytic ? EstimateMethod::hybrid : EstimateMethod::learned;
}

}  // namespace tacmod::learn
