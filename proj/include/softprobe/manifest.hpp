#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "softprobe/error.hpp"

namespace softprobe {

struct ManifestRecord {
  std::string image_path;
  std::string subject_id;
  std::string attribute;
  std::optional<int> partition;
};

// Dataset manifest: CSV with header image_path,subject_id,attribute and an
// optional partition column. Paths are resolved relative to the CSV's
// directory when not absolute. Fields must not contain commas.
struct DatasetManifest {
  std::string name;
  std::vector<ManifestRecord> records;
};

inline DatasetManifest load_manifest(const std::string& csv_path, std::string name = {}) {
  std::ifstream in(csv_path);
  if (!in) throw IoError("cannot open manifest " + csv_path);

  const std::filesystem::path base = std::filesystem::path(csv_path).parent_path();
  DatasetManifest manifest;
  manifest.name = name.empty() ? std::filesystem::path(csv_path).stem().string() : std::move(name);

  std::string line;
  if (!std::getline(in, line)) throw IoError("manifest " + csv_path + " is empty");
  auto split = [](const std::string& s) {
    std::vector<std::string> fields;
    std::stringstream ss(s);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
  };
  const std::vector<std::string> header = split(line);
  if (header.size() < 3 || header[0] != "image_path" || header[1] != "subject_id" ||
      header[2] != "attribute") {
    throw IoError("manifest " + csv_path +
                  ": expected header image_path,subject_id,attribute[,partition]");
  }
  const bool has_partition = header.size() >= 4 && header[3] == "partition";

  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split(line);
    if (fields.size() < 3) {
      throw IoError("manifest " + csv_path + ": malformed line " + std::to_string(line_no));
    }
    ManifestRecord record;
    std::filesystem::path p(fields[0]);
    record.image_path = p.is_absolute() ? p.string() : (base / p).string();
    record.subject_id = fields[1];
    record.attribute = fields[2];
    if (has_partition && fields.size() >= 4 && !fields[3].empty()) {
      record.partition = std::stoi(fields[3]);
    }
    manifest.records.push_back(std::move(record));
  }
  return manifest;
}

inline void save_manifest(const DatasetManifest& manifest, const std::string& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw IoError("cannot write manifest " + csv_path);
  out << "image_path,subject_id,attribute,partition\n";
  for (const ManifestRecord& r : manifest.records) {
    out << r.image_path << ',' << r.subject_id << ',' << r.attribute << ',';
    if (r.partition) out << *r.partition;
    out << '\n';
  }
  if (!out) throw IoError("failed while writing manifest " + csv_path);
}

}  // namespace softprobe
