#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace qsel {

struct ManifestEntry {
  std::string image_id;
  std::string path;  // as written in the manifest; resolved against an image root at load time
  bool label = false;

  bool operator==(const ManifestEntry&) const = default;
};

/// Labelled images for one binary state ("label = true" means the state holds).
struct DatasetManifest {
  std::string state_name;
  std::vector<ManifestEntry> entries;

  std::optional<std::size_t> index_of(std::string_view image_id) const;
  bool has_both_classes() const;

  bool operator==(const DatasetManifest&) const = default;
};

/// Throws MatrixError on an empty manifest or duplicate image ids.
void validate_manifest(const DatasetManifest& manifest);

nlohmann::json manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const nlohmann::json& doc);
DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

}  // namespace qsel
