#pragma once

// Adapter for the per-object folder layout used by published grasp datasets:
//
//   root/<object>/object.json          {"youngs_modulus_pa": .., "material": .., "shape": ..}
//   root/<object>/<grasp>/grasp.csv    time_s,force_n,width_m  (one row per frame)
//   root/<object>/<grasp>/depth_#####.npy   2-D depth map in mm, one per row
//   root/<object>/<grasp>/sensor.json  optional SensorSpec overrides
//
// Anything that does not parse is skipped with a warning.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tacmod/core/error.hpp"
#include "tacmod/core/io.hpp"
#include "tacmod/core/types.hpp"
#include "tacmod/learn/model.hpp"

namespace tacmod {

namespace npy {

struct Array2D {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;
};

/// Reads a 2-D little-endian float32/float64 .npy array (C or Fortran order).
inline Array2D parse(const io::Bytes& b) {
  static constexpr std::uint8_t magic[] = {0x93, 'N', 'U', 'M', 'P', 'Y'};
  require(b.size() >= 10 && std::equal(magic, magic + 6, b.begin()), ErrorKind::MalformedManifest, "not an npy file");
  const int major = b[6];
  std::size_t header_len = 0;
  std::size_t offset = 0;
  if (major == 1) {
    header_len = static_cast<std::size_t>(b[8]) | (static_cast<std::size_t>(b[9]) << 8);
    offset = 10;
  } else {
    require(major == 2 || major == 3, ErrorKind::VersionMismatch, "unsupported npy version");
    require(b.size() >= 12, ErrorKind::TruncatedPayload, "npy header truncated");
    header_len = io::load_u32_le(b.data() + 8);
    offset = 12;
  }
  require(b.size() >= offset + header_len, ErrorKind::TruncatedPayload, "npy header truncated");
  const std::string header(b.begin() + static_cast<std::ptrdiff_t>(offset),
                           b.begin() + static_cast<std::ptrdiff_t>(offset + header_len));
  std::smatch m;
  require(std::regex_search(header, m, std::regex(R"('descr'\s*:\s*'([^']*)')")), ErrorKind::MalformedManifest,
          "npy header lacks descr");
  const std::string descr = m[1];
  require(descr == "<f4" || descr == "<f8", ErrorKind::MalformedManifest, "unsupported npy dtype " + descr);
  require(std::regex_search(header, m, std::regex(R"('fortran_order'\s*:\s*(True|False))")),
          ErrorKind::MalformedManifest, "npy header lacks fortran_order");
  const bool fortran = m[1] == "True";
  require(std::regex_search(header, m, std::regex(R"('shape'\s*:\s*\(\s*(\d+)\s*,\s*(\d+)\s*,?\s*\))")),
          ErrorKind::MalformedManifest, "npy array is not 2-D");
  Array2D a;
  a.rows = std::stoul(m[1]);
  a.cols = std::stoul(m[2]);
  const std::size_t width = descr == "<f4" ? 4 : 8;
  const std::size_t n = a.rows * a.cols;
  const std::size_t start = offset + header_len;
  require(b.size() == start + n * width, ErrorKind::TruncatedPayload, "npy payload size does not match its shape");
  a.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* p = b.data() + start + i * width;
    const double v = width == 4 ? static_cast<double>(io::load_f32_le(p)) : io::load_f64_le(p);
    const std::size_t dst = fortran ? (i % a.rows) * a.cols + i / a.rows : i;
    a.data[dst] = static_cast<float>(v);
  }
  return a;
}

/// Version 1.0 float32 C-order encoding.
inline io::Bytes encode(std::size_t rows, std::size_t cols, const std::vector<float>& data) {
  std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': (" + std::to_string(rows) + ", " +
                       std::to_string(cols) + "), }";
  const std::size_t total = 10 + header.size() + 1;
  header.append((64 - total % 64) % 64, ' ');
  header.push_back('\n');
  io::Bytes out{0x93, 'N', 'U', 'M', 'P', 'Y', 1, 0};
  out.push_back(static_cast<std::uint8_t>(header.size() & 0xff));
  out.push_back(static_cast<std::uint8_t>(header.size() >> 8));
  out.insert(out.end(), header.begin(), header.end());
  for (float v : data) io::append_f32_le(out, v);
  return out;
}

}  // namespace npy

struct IngestResult {
  std::vector<GraspSequence> grasps;
  std::size_t attempted = 0;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;

  double parse_rate() const {
    return attempted == 0 ? 0.0 : static_cast<double>(grasps.size()) / static_cast<double>(attempted);
  }
};

namespace detail {

inline std::vector<std::vector<double>> read_grasp_csv(const std::filesystem::path& path) {
  std::istringstream in(io::read_text(path));
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::MalformedManifest, "empty grasp.csv");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "time_s,force_n,width_m", ErrorKind::MalformedManifest,
          "grasp.csv header must be time_s,force_n,width_m");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        require(used == cell.size(), ErrorKind::MalformedManifest, "bad number in grasp.csv: " + cell);
      } catch (const std::logic_error&) {
        fail(ErrorKind::MalformedManifest, "bad number in grasp.csv: " + cell);
      }
    }
    require(row.size() == 3, ErrorKind::MalformedManifest, "grasp.csv rows need three columns");
    rows.push_back(row);
  }
  return rows;
}

inline SensorSpec read_sensor(const std::filesystem::path& path) {
  SensorSpec s;
  if (!std::filesystem::exists(path)) return s;
  try {
    const auto j = nlohmann::json::parse(io::read_text(path));
    s.youngs_modulus_pa = j.value("youngs_modulus_pa", s.youngs_modulus_pa);
    s.poisson_ratio = j.value("poisson_ratio", s.poisson_ratio);
    s.width_mm = j.value("width_mm", s.width_mm);
    s.height_mm = j.value("height_mm", s.height_mm);
    s.pixels_x = j.value("pixels_x", s.pixels_x);
    s.pixels_y = j.value("pixels_y", s.pixels_y);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::MalformedManifest, std::string("bad sensor.json: ") + e.what());
  }
  return s;
}

inline GraspSequence read_external_grasp(const std::filesystem::path& dir, double label_pa, const Metadata& meta) {
  const auto rows = read_grasp_csv(dir / "grasp.csv");
  const SensorSpec sensor = read_sensor(dir / "sensor.json");
  std::vector<TactileFrame> frames;
  std::vector<double> force;
  std::vector<double> width;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "depth_%05zu.npy", i);
    const auto path = dir / name;
    require(std::filesystem::exists(path), ErrorKind::TruncatedPayload, "missing depth frame " + path.string());
    npy::Array2D a = npy::parse(io::read_bytes(path));
    require(a.rows == sensor.pixels_y && a.cols == sensor.pixels_x, ErrorKind::MalformedManifest,
            "depth frame shape differs from the sensor pixel counts");
    frames.emplace_back(rows[i][0], a.cols, a.rows, std::move(a.data));
    force.push_back(rows[i][1]);
    width.push_back(rows[i][2]);
  }
  return GraspSequence(sensor, std::move(frames), std::move(force), std::move(width), label_pa, meta);
}

}  // namespace detail

/// Converts an external dataset into grasp sequences. Labels outside
/// [5e3, 2.5e11] Pa are rejected per grasp.
inline IngestResult ingest_external_dataset(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  require(fs::is_directory(root), ErrorKind::PathMissing, "dataset directory not found: " + root.string());
  IngestResult result;
  std::vector<fs::path> objects;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory()) objects.push_back(e.path());
  }
  std::sort(objects.begin(), objects.end());
  const double lo = std::pow(10.0, learn::kLabelMinLog10);
  const double hi = std::pow(10.0, learn::kLabelMaxLog10);
  for (const auto& obj_dir : objects) {
    const std::string object = obj_dir.filename().string();
    std::vector<fs::path> grasp_dirs;
    for (const auto& e : fs::directory_iterator(obj_dir)) {
      if (e.is_directory()) grasp_dirs.push_back(e.path());
    }
    std::sort(grasp_dirs.begin(), grasp_dirs.end());
    double label = 0.0;
    Metadata base{{"object", object}, {"source", "external"}};
    try {
      const auto j = nlohmann::json::parse(io::read_text(obj_dir / "object.json"));
      label = j.at("youngs_modulus_pa").get<double>();
      base["material"] = j.value("material", "unknown");
      base["shape"] = j.value("shape", "unknown");
    } catch (const std::exception& e) {
      result.attempted += grasp_dirs.size();
      result.skipped += grasp_dirs.size();
      result.warnings.push_back(object + ": unreadable object.json (" + e.what() + ")");
      continue;
    }
    for (const auto& g : grasp_dirs) {
      ++result.attempted;
      const std::string id = object + "/" + g.filename().string();
      if (!(label >= lo && label <= hi)) {
        ++result.skipped;
        result.warnings.push_back(id + ": label outside [5e3, 2.5e11] Pa");
        continue;
      }
      Metadata meta = base;
      meta["grasp"] = object + "_" + g.filename().string();
      try {
        result.grasps.push_back(detail::read_external_grasp(g, label, meta));
      } catch (const Error& e) {
        ++result.skipped;
        result.warnings.push_back(id + ": " + e.what());
      }
    }
  }
  require(!result.grasps.empty(), ErrorKind::ZeroGrasps,
          "no parseable grasps under " + root.string() +
              (result.warnings.empty() ? std::string() : " (first problem: " + result.warnings.front() + ")"));
  return result;
}

/// Writes grasps in the external layout, grouped by their "object" metadata.
inline void export_external_dataset(const std::vector<GraspSequence>& grasps, const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::map<std::string, std::size_t> per_object;
  for (std::size_t i = 0; i < grasps.size(); ++i) {
    const GraspSequence& g = grasps[i];
    require(g.label_pa().has_value(), ErrorKind::InvalidValue, "exported grasps need a label");
    const std::string object = g.metadata_or("object", "object_" + std::to_string(i));
    const fs::path obj_dir = root / object;
    fs::create_directories(obj_dir);
    nlohmann::json oj{{"youngs_modulus_pa", *g.label_pa()},
                      {"material", g.metadata_or("material", "unknown")},
                      {"shape", g.metadata_or("shape", "unknown")}};
    io::write_text(obj_dir / "object.json", oj.dump(2));
    char gname[32];
    std::snprintf(gname, sizeof gname, "grasp_%03zu", per_object[object]++);
    const fs::path dir = obj_dir / gname;
    fs::create_directories(dir);
    std::ostringstream csv;
    csv.precision(17);
    csv << "time_s,force_n,width_m\n";
    for (std::size_t k = 0; k < g.size(); ++k) {
      csv << g.frames()[k].timestamp_s() << ',' << g.force_n()[k] << ',' << g.width_m()[k] << '\n';
      char fname[32];
      std::snprintf(fname, sizeof fname, "depth_%05zu.npy", k);
      const auto& f = g.frames()[k];
      io::write_bytes(dir / fname, npy::encode(f.rows(), f.cols(), f.depth_mm()));
    }
    io::write_text(dir / "grasp.csv", csv.str());
    const SensorSpec& s = g.sensor();
    nlohmann::json sj{{"youngs_modulus_pa", s.youngs_modulus_pa}, {"poisson_ratio", s.poisson_ratio},
                      {"width_mm", s.width_mm},                   {"height_mm", s.height_mm},
                      {"pixels_x", s.pixels_x},                   {"pixels_y", s.pixels_y}};
    io::write_text(dir / "sensor.json", sj.dump(2));
  }
}

}  // namespace tacmod
