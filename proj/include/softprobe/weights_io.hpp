#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "softprobe/error.hpp"

namespace softprobe {

// Binary weight container: 4-byte magic "SPWB", u32 format version, u64
// header length, UTF-8 JSON header, then one u64-length-prefixed float32
// array per entry of the header's "arrays" list, in that order. The header
// carries architecture, class names, seed and the training-split hash.
struct WeightFile {
  nlohmann::json header;
  std::map<std::string, std::vector<float>> arrays;
};

namespace detail {

inline constexpr char kWeightMagic[4] = {'S', 'P', 'W', 'B'};
inline constexpr uint32_t kWeightVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& path) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("truncated weight file " + path);
  return value;
}

}  // namespace detail

inline void save_weights(const WeightFile& file, const std::string& path) {
  nlohmann::json header = file.header;
  nlohmann::json names = nlohmann::json::array();
  for (const auto& [name, values] : file.arrays) names.push_back(name);
  header["arrays"] = names;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(detail::kWeightMagic, 4);
  detail::write_pod(out, detail::kWeightVersion);
  const std::string header_str = header.dump();
  detail::write_pod(out, static_cast<uint64_t>(header_str.size()));
  out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
  for (const auto& [name, values] : file.arrays) {
    detail::write_pod(out, static_cast<uint64_t>(values.size()));
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(float)));
  }
  if (!out) throw IoError("failed while writing " + path);
}

inline WeightFile load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, detail::kWeightMagic, 4) != 0) {
    throw IoError(path + " is not a weight container");
  }
  const auto version = detail::read_pod<uint32_t>(in, path);
  if (version != detail::kWeightVersion) {
    throw IoError(path + ": unsupported weight format version " + std::to_string(version));
  }
  const auto header_len = detail::read_pod<uint64_t>(in, path);
  std::string header_str(header_len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw IoError("truncated weight file " + path);

  WeightFile file;
  file.header = nlohmann::json::parse(header_str, nullptr, /*allow_exceptions=*/false);
  if (file.header.is_discarded()) throw IoError(path + ": corrupt weight header");

  for (const auto& name : file.header.at("arrays")) {
    const auto count = detail::read_pod<uint64_t>(in, path);
    std::vector<float> values(count);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    if (!in) throw IoError("truncated weight file " + path);
    file.arrays[name.get<std::string>()] = std::move(values);
  }
  return file;
}

// FNV-1a over the sorted source ids of a training split; recorded in weight
// headers so eval runs can detect classifier/split mismatches.
inline std::string split_hash(std::vector<std::string> ids) {
  std::sort(ids.begin(), ids.end());
  uint64_t h = 1469598103934665603ull;
  for (const std::string& id : ids) {
    for (char ch : id) {
      h ^= static_cast<uint8_t>(ch);
      h *= 1099511628211ull;
    }
    h ^= '\n';
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace softprobe
