#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hgl/metrics.hpp"

namespace hgl {

/// Landmark scheme definition: identity, cardinality, per-landmark names,
/// the left/right swap map used by mirroring, and optional correspondence
/// tables into other schemes.
struct SchemeFile {
  std::string id;
  std::size_t m = 0;
  std::vector<std::string> names;
  std::vector<std::pair<std::size_t, std::size_t>> flip_swap_map;
  std::vector<SchemeMap> correspondences;
};

inline void validate(const SchemeFile& s) {
  op_check(!s.id.empty(), "scheme: empty id");
  op_check(s.m >= 1, "scheme: m must be >= 1");
  op_check(s.names.size() == s.m, "scheme " + s.id + ": " + std::to_string(s.names.size()) +
                                      " names for m = " + std::to_string(s.m));
  std::set<std::string> unique_names(s.names.begin(), s.names.end());
  op_check(unique_names.size() == s.m, "scheme " + s.id + ": duplicate landmark names");
  std::vector<std::uint8_t> seen(s.m, 0);
  for (auto [a, b] : s.flip_swap_map) {
    op_check(a < s.m && b < s.m, "scheme " + s.id + ": swap index out of range");
    op_check(a != b && !seen[a] && !seen[b],
             "scheme " + s.id + ": swap map is not an involution");
    seen[a] = seen[b] = 1;
  }
  for (const auto& map : s.correspondences)
    op_check(map.name_a == s.id || map.name_b == s.id,
             "scheme " + s.id + ": correspondence " + map.name_a + "<->" + map.name_b +
                 " does not involve this scheme");
}

inline nlohmann::json to_json(const SchemeFile& s) {
  nlohmann::json j;
  j["id"] = s.id;
  j["m"] = s.m;
  j["names"] = s.names;
  auto& swap = j["flip_swap_map"] = nlohmann::json::array();
  for (auto [a, b] : s.flip_swap_map) swap.push_back({a, b});
  auto& maps = j["correspondences"] = nlohmann::json::array();
  for (const auto& map : s.correspondences) {
    nlohmann::json entry;
    entry["name_a"] = map.name_a;
    entry["name_b"] = map.name_b;
    auto& pairs = entry["pairs"] = nlohmann::json::array();
    for (auto [a, b] : map.pairs) pairs.push_back({a, b});
    maps.push_back(std::move(entry));
  }
  return j;
}

inline SchemeFile scheme_from_json(const nlohmann::json& j) {
  SchemeFile s;
  s.id = j.at("id").get<std::string>();
  s.m = j.at("m").get<std::size_t>();
  s.names = j.at("names").get<std::vector<std::string>>();
  for (const auto& p : j.at("flip_swap_map"))
    s.flip_swap_map.emplace_back(p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>());
  if (j.contains("correspondences")) {
    for (const auto& entry : j["correspondences"]) {
      SchemeMap map;
      map.name_a = entry.at("name_a").get<std::string>();
      map.name_b = entry.at("name_b").get<std::string>();
      for (const auto& p : entry.at("pairs"))
        map.pairs.emplace_back(p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>());
      s.correspondences.push_back(std::move(map));
    }
  }
  validate(s);
  return s;
}

inline void save_scheme(const std::string& path, const SchemeFile& s) {
  validate(s);
  std::ofstream out(path, std::ios::trunc);
  op_check(static_cast<bool>(out), "cannot open for writing: " + path);
  out << to_json(s).dump(2) << '\n';
  op_check(static_cast<bool>(out), "short write: " + path);
}

inline SchemeFile load_scheme(const std::string& path) {
  std::ifstream in(path);
  op_check(static_cast<bool>(in), "cannot open scheme file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("scheme file " + path + ": " + e.what());
  }
  try {
    return scheme_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("scheme file " + path + ": " + e.what());
  }
}

}  // namespace hgl
