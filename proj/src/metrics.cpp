// SPDX-License-Identifier: Apache-2.0
#include "dfd/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "dfd/error.hpp"

namespace dfd {

DepthMetrics evaluate(const DepthMap& pred, const DepthMap& truth,
                      const Grid* mask, std::optional<double> cap) {
  if (pred.height != truth.height || pred.width != truth.width)
    throw ShapeError("evaluate: prediction and truth shapes differ");
  if (mask && (mask->height != truth.height || mask->width != truth.width))
    throw ShapeError("evaluate: mask shape differs");

  DepthMetrics m;
  if (cap) m.cap = *cap;
  double sum_sq = 0.0, sum_rel = 0.0;
  std::int64_t n = 0, d1 = 0, d2 = 0, d3 = 0;
  for (int y = 0; y < truth.height; ++y) {
    for (int x = 0; x < truth.width; ++x) {
      if (mask && mask->at(y, x) == 0.0) continue;
      const double t = truth.at(y, x);
      if (cap && !(t < *cap)) continue;
      if (!(t > 0.0))
        throw DomainError("evaluate: non-positive truth depth at pixel (x=" +
                          std::to_string(x) + ", y=" + std::to_string(y) + ")");
      const double p = pred.at(y, x);
      const double ratio = std::max(p / t, t / p);
      if (ratio < 1.25) ++d1;
      if (ratio < 1.5625) ++d2;
      if (ratio < 1.953125) ++d3;
      sum_sq += (p - t) * (p - t);
      sum_rel += std::abs(p - t) / t;
      ++n;
    }
  }
  if (n == 0) throw EvalError("evaluate: no valid pixels");
  m.valid_pixel_count = n;
  m.delta1 = static_cast<double>(d1) / static_cast<double>(n);
  m.delta2 = static_cast<double>(d2) / static_cast<double>(n);
  m.delta3 = static_cast<double>(d3) / static_cast<double>(n);
  m.rmse = std::sqrt(sum_sq / static_cast<double>(n));
  m.absrel = sum_rel / static_cast<double>(n);
  return m;
}

void report_csv(const std::vector<SceneMetrics>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open metrics CSV for writing: " + path);
  out << "scene_id,delta1,delta2,delta3,rmse,absrel,valid_pixels,cap\n";
  char buffer[64];
  auto format = [&](double v) {
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    return std::string(buffer);
  };
  for (const SceneMetrics& row : rows) {
    const DepthMetrics& m = row.metrics;
    out << row.scene_id << ',' << format(m.delta1) << ',' << format(m.delta2) << ','
        << format(m.delta3) << ',' << format(m.rmse) << ',' << format(m.absrel)
        << ',' << m.valid_pixel_count << ','
        << (std::isnan(m.cap) ? std::string() : format(m.cap)) << '\n';
  }
  if (!out) throw IoError("failed writing metrics CSV: " + path);
}

}  // namespace dfd
