#include "qsel/dataset.hpp"

#include <fstream>
#include <set>

#include <fmt/format.h>

#include "qsel/error.hpp"

namespace qsel {

std::optional<std::size_t> DatasetManifest::index_of(std::string_view image_id) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].image_id == image_id) return i;
  }
  return std::nullopt;
}

bool DatasetManifest::has_both_classes() const {
  bool pos = false;
  bool neg = false;
  for (const auto& e : entries) {
    (e.label ? pos : neg) = true;
  }
  return pos && neg;
}

void validate_manifest(const DatasetManifest& manifest) {
  if (manifest.entries.empty()) throw MatrixError("dataset manifest has no entries");
  std::set<std::string_view> seen;
  for (const auto& e : manifest.entries) {
    if (e.image_id.empty()) throw MatrixError("dataset manifest: empty image_id");
    if (!seen.insert(e.image_id).second) {
      throw MatrixError(fmt::format("dataset manifest: duplicate image_id \"{}\"", e.image_id));
    }
  }
}

nlohmann::json manifest_to_json(const DatasetManifest& manifest) {
  auto entries = nlohmann::json::array();
  for (const auto& e : manifest.entries) {
    entries.push_back({{"image_id", e.image_id}, {"path", e.path}, {"label", e.label}});
  }
  return {{"state_name", manifest.state_name}, {"entries", std::move(entries)}};
}

DatasetManifest manifest_from_json(const nlohmann::json& doc) {
  DatasetManifest manifest;
  try {
    manifest.state_name = doc.at("state_name").get<std::string>();
    for (const auto& e : doc.at("entries")) {
      manifest.entries.push_back({e.at("image_id").get<std::string>(),
                                  e.at("path").get<std::string>(), e.at("label").get<bool>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw MatrixError(fmt::format("dataset manifest: {}", e.what()));
  }
  validate_manifest(manifest);
  return manifest;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MatrixError(fmt::format("cannot open dataset manifest {}", path.string()));
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw MatrixError(fmt::format("cannot parse dataset manifest {}: {}", path.string(), e.what()));
  }
  return manifest_from_json(doc);
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MatrixError(fmt::format("cannot write dataset manifest {}", path.string()));
  out << manifest_to_json(manifest).dump(2) << '\n';
}

}  // namespace qsel
