// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dfd/camera.hpp"
#include "dfd/losses.hpp"
#include "dfd/solver.hpp"

namespace dfd {

/// Ordered `key = value` text format with `#` comments. Keys may repeat;
/// typed getters use the last occurrence, get_all returns every one in order.
class KeyValueConfig {
 public:
  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<std::string> get_all(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void append(const std::string& key, const std::string& value);

  std::string serialize() const;
  void write_file(const std::string& path) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

 private:
  const std::string* find_last(const std::string& key) const;

  std::vector<std::pair<std::string, std::string>> entries_;
};

std::string format_double(double value);

CameraIntrinsics camera_from_config(const KeyValueConfig& cfg);
KeyValueConfig camera_to_config(const CameraIntrinsics& cam);

LossWeights weights_from_config(const KeyValueConfig& cfg);
KeyValueConfig weights_to_config(const LossWeights& w);

SolverConfig solver_from_config(const KeyValueConfig& cfg);
KeyValueConfig solver_to_config(const SolverConfig& cfg);

/// FNV-1a, used for provenance records.
std::uint64_t fnv1a_hash(std::string_view text);

}  // namespace dfd
