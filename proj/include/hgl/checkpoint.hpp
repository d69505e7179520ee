#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hgl/arch.hpp"
#include "hgl/nn.hpp"

namespace hgl {

inline constexpr char kCheckpointMagic[] = "GSCKPT1";  // 7 bytes on disk

inline std::string block_kind_name(BlockKind k) {
  return k == BlockKind::bottleneck ? "bottleneck" : "hpm";
}

inline BlockKind block_kind_from_name(const std::string& name) {
  if (name == "bottleneck") return BlockKind::bottleneck;
  if (name == "hpm") return BlockKind::hpm;
  throw std::invalid_argument("unknown block kind: " + name);
}

inline nlohmann::json arch_json(const FanConfig& cfg) {
  nlohmann::json j;
  j["kind"] = "fan";
  j["n_stacks"] = cfg.n_stacks;
  j["m_landmarks"] = cfg.m_landmarks;
  j["heatmap_h"] = cfg.heatmap_h;
  j["heatmap_w"] = cfg.heatmap_w;
  j["hourglass"] = {{"depth", cfg.hourglass.depth},
                    {"width", cfg.hourglass.width},
                    {"block", block_kind_name(cfg.hourglass.block)}};
  j["stem"] = {{"c1", cfg.stem.c1}, {"c2", cfg.stem.c2}};
  return j;
}

inline nlohmann::json arch_json(const DepthNetConfig& cfg) {
  nlohmann::json j;
  j["kind"] = "depth";
  j["n_landmarks"] = cfg.n_landmarks;
  j["block"] = block_kind_name(cfg.block);
  auto& tower = j["tower"] = nlohmann::json::array();
  for (const auto& s : cfg.tower)
    tower.push_back({{"width", s.width}, {"blocks", s.blocks}});
  return j;
}

inline FanConfig fan_config_from_json(const nlohmann::json& j) {
  op_check(j.at("kind").get<std::string>() == "fan",
           "architecture kind is " + j.at("kind").get<std::string>() + ", expected fan");
  FanConfig cfg;
  cfg.n_stacks = j.at("n_stacks").get<int>();
  cfg.m_landmarks = j.at("m_landmarks").get<std::size_t>();
  cfg.heatmap_h = j.at("heatmap_h").get<std::size_t>();
  cfg.heatmap_w = j.at("heatmap_w").get<std::size_t>();
  const auto& hg = j.at("hourglass");
  cfg.hourglass.depth = hg.at("depth").get<int>();
  cfg.hourglass.width = hg.at("width").get<std::size_t>();
  cfg.hourglass.block = block_kind_from_name(hg.at("block").get<std::string>());
  cfg.stem.c1 = j.at("stem").at("c1").get<std::size_t>();
  cfg.stem.c2 = j.at("stem").at("c2").get<std::size_t>();
  validate(cfg);
  return cfg;
}

inline DepthNetConfig depth_config_from_json(const nlohmann::json& j) {
  op_check(j.at("kind").get<std::string>() == "depth",
           "architecture kind is " + j.at("kind").get<std::string>() + ", expected depth");
  DepthNetConfig cfg;
  cfg.n_landmarks = j.at("n_landmarks").get<std::size_t>();
  cfg.block = block_kind_from_name(j.at("block").get<std::string>());
  cfg.tower.clear();
  for (const auto& s : j.at("tower"))
    cfg.tower.push_back({s.at("width").get<std::size_t>(), s.at("blocks").get<int>()});
  validate(cfg);
  return cfg;
}

struct CheckpointMeta {
  nlohmann::json arch;
  std::string scheme;
  int epoch = 0;
  std::vector<std::pair<std::string, Shape>> params;  // name order, as stored
};

namespace detail {

inline void put_u32_le(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff),
                         static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

inline std::uint32_t get_u32_le(std::istream& in, const std::string& path) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  op_check(in.gcount() == 4, "checkpoint " + path + ": truncated header length");
  return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) |
         (static_cast<std::uint32_t>(bytes[3]) << 24);
}

inline void put_f32_le(std::string& buf, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  buf.push_back(static_cast<char>(bits & 0xff));
  buf.push_back(static_cast<char>((bits >> 8) & 0xff));
  buf.push_back(static_cast<char>((bits >> 16) & 0xff));
  buf.push_back(static_cast<char>((bits >> 24) & 0xff));
}

inline float get_f32_le(const unsigned char* p) {
  const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                             (static_cast<std::uint32_t>(p[1]) << 8) |
                             (static_cast<std::uint32_t>(p[2]) << 16) |
                             (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

}  // namespace detail

/// Serialises every parameter (trainable and running statistics alike) in
/// name order: magic, little-endian header length, JSON header, then raw
/// little-endian 32-bit floats. The file appears atomically via a rename.
template <typename T, typename Model>
void save_checkpoint(Model& model, const std::string& scheme, int epoch,
                     const std::string& path) {
  auto params = named_params<T>(model);
  nlohmann::json header;
  header["arch"] = arch_json(model.cfg);
  header["scheme"] = scheme;
  header["epoch"] = epoch;
  auto& manifest = header["params"] = nlohmann::json::array();
  std::string payload;
  for (auto& [name, p] : params) {
    manifest.push_back({{"name", name}, {"shape", p.tensor.shape()}});
    for (T v : p.tensor.data()) detail::put_f32_le(payload, static_cast<float>(v));
  }
  const std::string header_str = header.dump();
  op_check(header_str.size() <= 0xffffffffu, "checkpoint header too large");

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    op_check(static_cast<bool>(out), "cannot open for writing: " + tmp);
    out.write(kCheckpointMagic, 7);
    detail::put_u32_le(out, static_cast<std::uint32_t>(header_str.size()));
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    op_check(static_cast<bool>(out), "short write: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

/// Reads magic and header only; cheap introspection for model construction.
inline CheckpointMeta read_checkpoint_header(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  op_check(static_cast<bool>(in), "cannot open checkpoint: " + path);
  char magic[7];
  in.read(magic, 7);
  op_check(in.gcount() == 7 && std::string(magic, 7) == kCheckpointMagic,
           "checkpoint " + path + ": bad magic, not a GSCKPT1 file");
  const std::uint32_t header_len = detail::get_u32_le(in, path);
  std::string header_str(header_len, '\0');
  in.read(header_str.data(), header_len);
  op_check(in.gcount() == static_cast<std::streamsize>(header_len),
           "checkpoint " + path + ": truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_str);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("checkpoint " + path + ": malformed header: " + e.what());
  }
  CheckpointMeta meta;
  meta.arch = header.at("arch");
  meta.scheme = header.at("scheme").get<std::string>();
  meta.epoch = header.at("epoch").get<int>();
  for (const auto& entry : header.at("params"))
    meta.params.emplace_back(entry.at("name").get<std::string>(),
                             entry.at("shape").get<Shape>());
  return meta;
}

/// Loads parameters into an already-constructed model. The stored
/// architecture and parameter manifest must match the model exactly.
template <typename T, typename Model>
CheckpointMeta load_checkpoint(const std::string& path, Model& model) {
  const CheckpointMeta meta = read_checkpoint_header(path);
  const nlohmann::json expected_arch = arch_json(model.cfg);
  op_check(meta.arch == expected_arch,
           "checkpoint " + path + ": architecture mismatch: stored " + meta.arch.dump() +
               ", model " + expected_arch.dump());

  auto params = named_params<T>(model);
  op_check(meta.params.size() == params.size(),
           "checkpoint " + path + ": " + std::to_string(meta.params.size()) +
               " stored parameters, model has " + std::to_string(params.size()));
  std::size_t total = 0;
  std::size_t i = 0;
  for (auto& [name, p] : params) {
    const auto& [stored_name, stored_shape] = meta.params[i++];
    op_check(stored_name == name && stored_shape == p.tensor.shape(),
             "checkpoint " + path + ": parameter " + std::to_string(i - 1) + " is " +
                 stored_name + shape_str(stored_shape) + ", model expects " + name +
                 shape_str(p.tensor.shape()));
    total += p.tensor.numel();
  }

  std::ifstream in(path, std::ios::binary);
  op_check(static_cast<bool>(in), "cannot open checkpoint: " + path);
  in.seekg(0, std::ios::end);
  const auto file_size = static_cast<std::size_t>(in.tellg());
  in.seekg(7, std::ios::beg);
  const std::uint32_t header_len = detail::get_u32_le(in, path);
  const std::size_t payload_offset = 7 + 4 + header_len;
  const std::size_t expected_bytes = total * 4;
  op_check(file_size >= payload_offset &&
               file_size - payload_offset == expected_bytes,
           "checkpoint " + path + ": expected " + std::to_string(expected_bytes) +
               " payload bytes, got " +
               std::to_string(file_size > payload_offset ? file_size - payload_offset : 0));

  std::vector<unsigned char> payload(expected_bytes);
  in.seekg(static_cast<std::streamoff>(payload_offset), std::ios::beg);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(expected_bytes));
  op_check(in.gcount() == static_cast<std::streamsize>(expected_bytes),
           "checkpoint " + path + ": truncated payload read");

  const unsigned char* cursor = payload.data();
  for (auto& [name, p] : params) {
    auto& data = p.tensor.data();
    for (auto& v : data) {
      v = static_cast<T>(detail::get_f32_le(cursor));
      cursor += 4;
    }
  }
  return meta;
}

}  // namespace hgl
