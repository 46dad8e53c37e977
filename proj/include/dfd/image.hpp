// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dfd {

/// Single-channel scalar field, row-major.
struct Grid {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Grid() = default;
  Grid(int h, int w, double fill = 0.0)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

  double& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
  double at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::size_t pixel_count() const { return data.size(); }
};

/// Per-pixel scene depth in meters.
struct DepthMap : Grid {
  using Grid::Grid;
  DepthMap() = default;
  explicit DepthMap(Grid grid) : Grid(std::move(grid)) {}
};

/// Per-pixel Gaussian PSF sigma in pixels.
struct DefocusMap : Grid {
  using Grid::Grid;
  DefocusMap() = default;
  explicit DefocusMap(Grid grid) : Grid(std::move(grid)) {}
};

/// Multi-channel interleaved field, row-major. Base for intensity images and
/// for image-shaped gradient buffers, which carry no range invariant.
struct Field {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<double> data;

  Field() = default;
  Field(int h, int w, int c, double fill = 0.0)
      : height(h),
        width(w),
        channels(c),
        data(static_cast<std::size_t>(h) * w * c, fill) {}

  double& at(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::size_t value_count() const { return data.size(); }
};

/// Intensity image, 1 or 3 channels, values in [0, 1].
struct Image : Field {
  using Field::Field;
  Image() = default;
  explicit Image(Field field) : Field(std::move(field)) {}
};

/// K defocus images of one scene and the focus distance each was taken at.
struct FocalStack {
  std::vector<Image> images;
  std::vector<double> focus_distances;  // meters, strictly increasing

  int slice_count() const { return static_cast<int>(images.size()); }
};

/// Invariant checks. Return std::nullopt when the invariants hold, otherwise
/// a description of the first violation naming the offending pixel.
std::optional<std::string> validate(const Image& img);
std::optional<std::string> validate(const DepthMap& depth, double depth_min,
                                    double depth_max);
std::optional<std::string> validate(const DefocusMap& sigma);
std::optional<std::string> validate(const FocalStack& stack);

Grid channel_mean(const Field& img);
Grid channel_plane(const Field& img, int c);

struct GradientPair {
  Grid dx, dy;
};

/// Forward differences. The trailing column of dx and trailing row of dy are
/// zero. Requires height, width >= 2.
GradientPair spatial_gradients(const Grid& field);
GradientPair spatial_gradients(const Image& img);  // channel mean first

/// 3x3 discrete Laplacian (center 4, cross -1), replicate padding at the
/// borders. Requires height, width >= 3.
Grid laplacian(const Grid& field);
Grid laplacian(const Image& img);  // channel mean first

/// Transpose of `laplacian` under the same replicate padding.
Grid laplacian_adjoint(const Grid& field);

/// Sum over the (2*radius+1)^2 neighborhood, replicate padding.
Grid box_sum(const Grid& field, int radius);

}  // namespace dfd
