// SPDX-License-Identifier: Apache-2.0
#include "dfd/image.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dfd/error.hpp"

namespace dfd {

namespace {

std::string pixel_str(int y, int x) {
  std::ostringstream os;
  os << "(x=" << x << ", y=" << y << ")";
  return os.str();
}

int clampi(int v, int lo, int hi) { return std::max(lo, std::min(v, hi)); }

}  // namespace

std::optional<std::string> validate(const Image& img) {
  if (img.height <= 0 || img.width <= 0)
    return "image has non-positive dimensions";
  if (img.channels != 1 && img.channels != 3)
    return "image channel count must be 1 or 3, got " + std::to_string(img.channels);
  const std::size_t expected =
      static_cast<std::size_t>(img.height) * img.width * img.channels;
  if (img.data.size() != expected)
    return "image data length " + std::to_string(img.data.size()) +
           " does not match height*width*channels = " + std::to_string(expected);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        const double v = img.at(y, x, c);
        if (!std::isfinite(v))
          return "non-finite intensity at pixel " + pixel_str(y, x) + " channel " +
                 std::to_string(c);
        if (v < 0.0 || v > 1.0)
          return "intensity " + std::to_string(v) + " outside [0, 1] at pixel " +
                 pixel_str(y, x) + " channel " + std::to_string(c);
      }
    }
  }
  return std::nullopt;
}

std::optional<std::string> validate(const DepthMap& depth, double depth_min,
                                    double depth_max) {
  if (depth.height <= 0 || depth.width <= 0)
    return "depth map has non-positive dimensions";
  const std::size_t expected = static_cast<std::size_t>(depth.height) * depth.width;
  if (depth.data.size() != expected)
    return "depth data length does not match height*width";
  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x) {
      const double v = depth.at(y, x);
      if (!std::isfinite(v))
        return "non-finite depth at pixel " + pixel_str(y, x);
      if (v < depth_min || v > depth_max)
        return "depth " + std::to_string(v) + " outside [" + std::to_string(depth_min) +
               ", " + std::to_string(depth_max) + "] at pixel " + pixel_str(y, x);
    }
  }
  return std::nullopt;
}

std::optional<std::string> validate(const DefocusMap& sigma) {
  if (sigma.height <= 0 || sigma.width <= 0)
    return "defocus map has non-positive dimensions";
  const std::size_t expected = static_cast<std::size_t>(sigma.height) * sigma.width;
  if (sigma.data.size() != expected)
    return "defocus data length does not match height*width";
  for (int y = 0; y < sigma.height; ++y) {
    for (int x = 0; x < sigma.width; ++x) {
      const double v = sigma.at(y, x);
      if (!std::isfinite(v)) return "non-finite sigma at pixel " + pixel_str(y, x);
      if (v < 0.0) return "negative sigma at pixel " + pixel_str(y, x);
    }
  }
  return std::nullopt;
}

std::optional<std::string> validate(const FocalStack& stack) {
  if (stack.slice_count() < 2)
    return "focal stack needs at least 2 slices, got " +
           std::to_string(stack.slice_count());
  if (stack.focus_distances.size() != stack.images.size())
    return "focus distance count does not match slice count";
  for (std::size_t k = 1; k < stack.focus_distances.size(); ++k) {
    if (!(stack.focus_distances[k] > stack.focus_distances[k - 1]))
      return "focus distances not strictly increasing at slot " + std::to_string(k);
  }
  const Image& first = stack.images.front();
  for (std::size_t k = 0; k < stack.images.size(); ++k) {
    const Image& img = stack.images[k];
    if (img.height != first.height || img.width != first.width ||
        img.channels != first.channels)
      return "slice " + std::to_string(k) + " shape differs from slice 0";
    if (auto bad = validate(img)) return "slice " + std::to_string(k) + ": " + *bad;
  }
  return std::nullopt;
}

Grid channel_mean(const Field& img) {
  Grid out(img.height, img.width);
  const double inv = 1.0 / img.channels;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int c = 0; c < img.channels; ++c) acc += img.at(y, x, c);
      out.at(y, x) = acc * inv;
    }
  }
  return out;
}

Grid channel_plane(const Field& img, int c) {
  if (c < 0 || c >= img.channels)
    throw std::out_of_range("channel_plane: channel " + std::to_string(c) +
                            " out of range");
  Grid out(img.height, img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) out.at(y, x) = img.at(y, x, c);
  return out;
}

GradientPair spatial_gradients(const Grid& field) {
  if (field.height < 2 || field.width < 2)
    throw ShapeError("spatial_gradients: field must be at least 2x2");
  GradientPair g{Grid(field.height, field.width), Grid(field.height, field.width)};
  for (int y = 0; y < field.height; ++y) {
    for (int x = 0; x < field.width; ++x) {
      if (x + 1 < field.width) g.dx.at(y, x) = field.at(y, x + 1) - field.at(y, x);
      if (y + 1 < field.height) g.dy.at(y, x) = field.at(y + 1, x) - field.at(y, x);
    }
  }
  return g;
}

GradientPair spatial_gradients(const Image& img) {
  return spatial_gradients(channel_mean(img));
}

Grid laplacian(const Grid& field) {
  if (field.height < 3 || field.width < 3)
    throw ShapeError("laplacian: field must be at least 3x3");
  Grid out(field.height, field.width);
  for (int y = 0; y < field.height; ++y) {
    for (int x = 0; x < field.width; ++x) {
      const double up = field.at(clampi(y - 1, 0, field.height - 1), x);
      const double down = field.at(clampi(y + 1, 0, field.height - 1), x);
      const double left = field.at(y, clampi(x - 1, 0, field.width - 1));
      const double right = field.at(y, clampi(x + 1, 0, field.width - 1));
      out.at(y, x) = 4.0 * field.at(y, x) - up - down - left - right;
    }
  }
  return out;
}

Grid laplacian(const Image& img) { return laplacian(channel_mean(img)); }

Grid laplacian_adjoint(const Grid& field) {
  if (field.height < 3 || field.width < 3)
    throw ShapeError("laplacian_adjoint: field must be at least 3x3");
  Grid out(field.height, field.width);
  for (int y = 0; y < field.height; ++y) {
    for (int x = 0; x < field.width; ++x) {
      const double g = field.at(y, x);
      out.at(y, x) += 4.0 * g;
      out.at(clampi(y - 1, 0, field.height - 1), x) -= g;
      out.at(clampi(y + 1, 0, field.height - 1), x) -= g;
      out.at(y, clampi(x - 1, 0, field.width - 1)) -= g;
      out.at(y, clampi(x + 1, 0, field.width - 1)) -= g;
    }
  }
  return out;
}

Grid box_sum(const Grid& field, int radius) {
  if (radius < 0) throw DomainError("box_sum: radius must be non-negative");
  Grid out(field.height, field.width);
  for (int y = 0; y < field.height; ++y) {
    for (int x = 0; x < field.width; ++x) {
      double acc = 0.0;
      for (int dy = -radius; dy <= radius; ++dy) {
        const int yy = clampi(y + dy, 0, field.height - 1);
        for (int dx = -radius; dx <= radius; ++dx)
          acc += field.at(yy, clampi(x + dx, 0, field.width - 1));
      }
      out.at(y, x) = acc;
    }
  }
  return out;
}

}  // namespace dfd
