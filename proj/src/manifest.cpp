// SPDX-License-Identifier: Apache-2.0
#include "dfd/manifest.hpp"

#include <filesystem>
#include <sstream>

#include "dfd/config.hpp"
#include "dfd/error.hpp"
#include "dfd/image_io.hpp"

namespace fs = std::filesystem;

namespace dfd {

namespace {

std::pair<std::string, double> parse_slice_entry(const std::string& entry) {
  const auto ws = entry.find_last_of(" \t");
  if (ws == std::string::npos)
    throw ConfigError("slice entry must be '<filename> <focus distance>', got '" +
                      entry + "'");
  const std::string filename = entry.substr(0, ws);
  const std::string distance_text = entry.substr(ws + 1);
  try {
    return {filename, std::stod(distance_text)};
  } catch (const std::exception&) {
    throw ConfigError("cannot parse focus distance '" + distance_text +
                      "' in slice entry '" + entry + "'");
  }
}

}  // namespace

StackManifest load_manifest(const std::string& path) {
  const KeyValueConfig cfg = KeyValueConfig::parse_file(path);
  StackManifest manifest;
  manifest.scene_id = cfg.get_string("scene");
  manifest.preset = cfg.get_string("preset");
  manifest.truth_depth = cfg.get_string("truth_depth", "");
  if (cfg.has("noise_sigma")) manifest.noise_sigma = cfg.get_double("noise_sigma");

  for (const std::string& entry : cfg.get_all("slice"))
    manifest.slices.push_back(parse_slice_entry(entry));
  if (manifest.slices.size() < 2)
    throw ConfigError(path + ": manifest needs at least 2 slices");
  for (std::size_t k = 1; k < manifest.slices.size(); ++k)
    if (!(manifest.slices[k].second > manifest.slices[k - 1].second))
      throw ConfigError(path + ": focus distances not strictly increasing at slice " +
                        std::to_string(k));

  const fs::path base = fs::path(path).parent_path();
  for (const auto& [filename, distance] : manifest.slices)
    if (!fs::exists(base / filename))
      throw IoError(path + ": slice file not found: " + filename);
  if (!manifest.truth_depth.empty() && !fs::exists(base / manifest.truth_depth))
    throw IoError(path + ": truth depth file not found: " + manifest.truth_depth);
  return manifest;
}

void save_manifest(const StackManifest& manifest, const std::string& path) {
  KeyValueConfig cfg;
  cfg.set("scene", manifest.scene_id);
  cfg.set("preset", manifest.preset);
  if (!manifest.truth_depth.empty()) cfg.set("truth_depth", manifest.truth_depth);
  if (manifest.noise_sigma) cfg.set("noise_sigma", *manifest.noise_sigma);
  for (const auto& [filename, distance] : manifest.slices)
    cfg.append("slice", filename + " " + format_double(distance));
  cfg.write_file(path);
}

FocalStack load_stack(const StackManifest& manifest, const std::string& base_dir) {
  FocalStack stack;
  const fs::path base(base_dir);
  for (const auto& [filename, distance] : manifest.slices) {
    stack.images.push_back(read_image_png((base / filename).string()));
    stack.focus_distances.push_back(distance);
  }
  if (auto bad = validate(stack))
    throw ConfigError("manifest stack invalid: " + *bad);
  return stack;
}

}  // namespace dfd
