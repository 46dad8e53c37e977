// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "dfd/camera.hpp"
#include "dfd/image.hpp"
#include "dfd/psf.hpp"

namespace dfd_test {

inline double rel_err(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

inline dfd::Grid random_grid(int h, int w, double lo, double hi,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  dfd::Grid grid(h, w);
  for (double& v : grid.data) v = dist(rng);
  return grid;
}

inline dfd::Image random_image(int h, int w, int channels, double lo, double hi,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  dfd::Image img(h, w, channels);
  for (double& v : img.data) v = dist(rng);
  return img;
}

/// Strongly textured 3-channel AIF: per-pixel noise over a smooth ramp.
inline dfd::Image textured_aif(int h, int w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-0.35, 0.35);
  dfd::Image img(h, w, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double base = 0.35 + 0.3 * (static_cast<double>(x) + y) / (w + h);
      for (int c = 0; c < 3; ++c)
        img.at(y, x, c) = std::clamp(base + dist(rng), 0.02, 0.98);
    }
  return img;
}

/// Textured AIF with a natural-image-like band-limited spectrum: white noise
/// smoothed once, then contrast-stretched.
inline dfd::Image natural_texture_aif(int h, int w, std::uint64_t seed,
                                      double smooth_sigma = 2.0) {
  const dfd::Image noise = random_image(h, w, 3, 0.0, 1.0, seed);
  const dfd::PsfConfig no_threshold{7, 1e-3};
  dfd::Image smooth = dfd::render_defocus(
      noise, dfd::DefocusMap(h, w, smooth_sigma), no_threshold);
  double lo = 1e300, hi = -1e300;
  for (double v : smooth.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (double& v : smooth.data) v = 0.05 + 0.90 * (v - lo) / (hi - lo);
  return smooth;
}

/// Left half at near depth, right half at far depth.
inline dfd::DepthMap two_plane_depth(int h, int w, double near_m, double far_m) {
  dfd::DepthMap depth(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) depth.at(y, x) = x < w / 2 ? near_m : far_m;
  return depth;
}

/// Pixels whose local intensity-gradient energy is meaningful.
inline dfd::Grid textured_mask(const dfd::Image& aif, double threshold = 0.01) {
  const dfd::GradientPair g = dfd::spatial_gradients(aif);
  dfd::Grid energy(aif.height, aif.width);
  for (std::size_t i = 0; i < energy.data.size(); ++i)
    energy.data[i] =
        g.dx.data[i] * g.dx.data[i] + g.dy.data[i] * g.dy.data[i];
  const dfd::Grid local = dfd::box_sum(energy, 2);
  dfd::Grid mask(aif.height, aif.width);
  for (std::size_t i = 0; i < mask.data.size(); ++i)
    mask.data[i] = local.data[i] > threshold ? 1.0 : 0.0;
  return mask;
}

/// Histogram mode (then mean within the winning bin) of a sample set.
inline double region_mode(std::vector<double> values, double bin_width = 0.02) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double lo = values.front();
  const int bins =
      static_cast<int>((values.back() - lo) / bin_width) + 1;
  std::vector<int> counts(static_cast<std::size_t>(bins), 0);
  for (double v : values)
    ++counts[static_cast<std::size_t>(std::min<int>(
        bins - 1, static_cast<int>((v - lo) / bin_width)))];
  const int best = static_cast<int>(
      std::max_element(counts.begin(), counts.end()) - counts.begin());
  double sum = 0.0;
  int n = 0;
  for (double v : values) {
    const int b = std::min<int>(bins - 1, static_cast<int>((v - lo) / bin_width));
    if (b == best) {
      sum += v;
      ++n;
    }
  }
  return sum / n;
}

/// Scratch directory under the system temp root, unique per call.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("dfd_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace dfd_test
