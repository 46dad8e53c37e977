// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dfd/image.hpp"

namespace dfd {

/// Standard depth accuracy metrics. delta_i is the fraction of valid pixels
/// with max(pred/truth, truth/pred) < 1.25^i (strict comparison).
struct DepthMetrics {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  double rmse = 0.0;    // meters
  double absrel = 0.0;  // dimensionless
  std::int64_t valid_pixel_count = 0;
  double cap = std::numeric_limits<double>::quiet_NaN();  // NaN when uncapped
};

/// mask: nonzero entries mark valid pixels (all valid when null).
/// cap: restrict evaluation to pixels with truth < cap.
DepthMetrics evaluate(const DepthMap& pred, const DepthMap& truth,
                      const Grid* mask = nullptr,
                      std::optional<double> cap = std::nullopt);

struct SceneMetrics {
  std::string scene_id;
  DepthMetrics metrics;
};

/// CSV with columns scene_id, delta1, delta2, delta3, rmse, absrel,
/// valid_pixels, cap (cap column empty when uncapped).
void report_csv(const std::vector<SceneMetrics>& rows, const std::string& path);

}  // namespace dfd
