#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hgl/augment.hpp"
#include "hgl/image.hpp"
#include "hgl/landmarks.hpp"
#include "hgl/scheme.hpp"

namespace hgl {

/// One dataset sample: image location plus annotations. Landmarks may carry
/// a depth as a third coordinate; the face box is optional.
struct ManifestRecord {
  std::string image;
  LandmarkSet landmarks;
  std::optional<Box> bbox;
};

namespace detail {

inline ManifestRecord record_from_json(const nlohmann::json& j) {
  ManifestRecord r;
  r.image = j.at("image").get<std::string>();
  r.landmarks.scheme = j.at("scheme").get<std::string>();
  for (const auto& p : j.at("landmarks")) {
    op_check(p.is_array() && (p.size() == 2 || p.size() == 3),
             "landmarks entries must be [x,y] or [x,y,z]");
    r.landmarks.points.push_back({p.at(0).get<double>(), p.at(1).get<double>(),
                                  p.size() == 3 ? p.at(2).get<double>() : 0.0});
  }
  for (const auto& v : j.at("visibility"))
    r.landmarks.visibility.push_back(v.get<int>() ? 1 : 0);
  op_check(r.landmarks.points.size() == r.landmarks.visibility.size(),
           std::to_string(r.landmarks.points.size()) + " landmarks vs " +
               std::to_string(r.landmarks.visibility.size()) + " visibility flags");
  if (j.contains("bbox") && !j["bbox"].is_null()) {
    const auto& b = j["bbox"];
    op_check(b.is_array() && b.size() == 4, "bbox must be [x0,y0,x1,y1]");
    r.bbox = Box{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                 b.at(3).get<double>()};
  }
  return r;
}

inline nlohmann::json record_to_json(const ManifestRecord& r) {
  nlohmann::json j;
  j["image"] = r.image;
  auto& pts = j["landmarks"] = nlohmann::json::array();
  for (const auto& p : r.landmarks.points) pts.push_back({p.x, p.y, p.z});
  auto& vis = j["visibility"] = nlohmann::json::array();
  for (auto v : r.landmarks.visibility) vis.push_back(static_cast<int>(v));
  j["scheme"] = r.landmarks.scheme;
  if (r.bbox) j["bbox"] = {r.bbox->x0, r.bbox->y0, r.bbox->x1, r.bbox->y1};
  return j;
}

}  // namespace detail

/// Reads a line-delimited JSON manifest, one record per line, preserving
/// order. Failures name the offending line.
inline std::vector<ManifestRecord> load_manifest(const std::string& path) {
  std::ifstream in(path);
  op_check(static_cast<bool>(in), "cannot open manifest: " + path);
  std::vector<ManifestRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(detail::record_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw std::invalid_argument("manifest " + path + ", record at line " +
                                  std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

inline void save_manifest(const std::string& path, const std::vector<ManifestRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  op_check(static_cast<bool>(out), "cannot open for writing: " + path);
  for (const auto& r : records) out << detail::record_to_json(r).dump() << '\n';
  op_check(static_cast<bool>(out), "short write: " + path);
}

/// Checks every record against the scheme; failures name the record.
inline void validate_manifest(const std::vector<ManifestRecord>& records,
                              const SchemeFile& scheme) {
  validate(scheme);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    op_check(r.landmarks.scheme == scheme.id,
             "record " + std::to_string(i) + " (" + r.image + "): scheme " +
                 r.landmarks.scheme + ", expected " + scheme.id);
    op_check(r.landmarks.size() == scheme.m,
             "record " + std::to_string(i) + " (" + r.image + "): " +
                 std::to_string(r.landmarks.size()) + " points under a " +
                 std::to_string(scheme.m) + "-point scheme");
  }
}

/// Loads the records' images (paths resolved relative to the manifest's
/// directory) into training-ready samples, in manifest order.
inline std::vector<Sample> load_dataset(const std::string& manifest_path,
                                        const SchemeFile& scheme) {
  const auto records = load_manifest(manifest_path);
  validate_manifest(records, scheme);
  const auto base = std::filesystem::path(manifest_path).parent_path();
  std::vector<Sample> samples;
  samples.reserve(records.size());
  for (const auto& r : records) {
    const std::filesystem::path img_path = std::filesystem::path(r.image).is_absolute()
                                               ? std::filesystem::path(r.image)
                                               : base / r.image;
    samples.push_back({read_ppm(img_path.string()), r.landmarks});
  }
  return samples;
}

}  // namespace hgl
