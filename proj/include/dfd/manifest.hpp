// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dfd/image.hpp"

namespace dfd {

/// Describes a focal stack stored as files: slice images plus the focus
/// distance each was captured at (standing in for EXIF metadata).
struct StackManifest {
  std::string scene_id;
  std::string preset;  // camera preset name
  std::vector<std::pair<std::string, double>> slices;  // filename, meters
  std::string truth_depth;                             // optional filename
  std::optional<double> noise_sigma;                   // recorded when added
};

/// Parses a manifest and verifies the referenced files exist next to it and
/// the focus distances strictly increase.
StackManifest load_manifest(const std::string& path);
void save_manifest(const StackManifest& manifest, const std::string& path);

/// Reads every slice image listed in the manifest, relative to base_dir.
FocalStack load_stack(const StackManifest& manifest, const std::string& base_dir);

}  // namespace dfd
