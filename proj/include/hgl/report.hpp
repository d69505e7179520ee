#pragma once

#include <fstream>
#include <iomanip>
#include <string>

#include <json.hpp>

#include "hgl/metrics.hpp"

namespace hgl {

namespace detail {

inline std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  op_check(static_cast<bool>(out), "cannot open for writing: " + path);
  out << std::setprecision(17);
  return out;
}

}  // namespace detail

inline void write_ced_csv(const std::string& path, const EvalReport& report) {
  auto out = detail::open_for_write(path);
  out << "threshold,fraction\n";
  for (auto [t, f] : report.ced) out << t << ',' << f << '\n';
  op_check(static_cast<bool>(out), "short write: " + path);
}

inline void write_per_landmark_csv(const std::string& path, const EvalReport& report) {
  auto out = detail::open_for_write(path);
  out << "landmark,nme\n";
  for (const auto& [id, e] : report.per_landmark_nme) out << id << ',' << e << '\n';
  op_check(static_cast<bool>(out), "short write: " + path);
}

inline void write_report_json(const std::string& path, const EvalReport& report) {
  nlohmann::json j;
  j["per_sample_nme"] = report.per_sample_nme;
  j["auc"] = report.auc;
  auto& curve = j["ced"] = nlohmann::json::array();
  for (auto [t, f] : report.ced) curve.push_back({{"threshold", t}, {"fraction", f}});
  auto& per_landmark = j["per_landmark_nme"] = nlohmann::json::object();
  for (const auto& [id, e] : report.per_landmark_nme) per_landmark[std::to_string(id)] = e;
  j["excluded_samples"] = report.excluded_samples;
  j["notes"] = report.notes;
  auto out = detail::open_for_write(path);
  out << j.dump(2) << '\n';
  op_check(static_cast<bool>(out), "short write: " + path);
}

}  // namespace hgl
