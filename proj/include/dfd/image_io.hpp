// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "dfd/image.hpp"

namespace dfd {

/// PNG intensities map linearly to [0, 1]; gray and RGB, 8- and 16-bit.
/// Palette images expand to RGB; alpha channels are stripped.
Image read_image_png(const std::string& path);
void write_image_png(const std::string& path, const Image& img, int bit_depth = 8);

/// Depth as 16-bit grayscale PNG with millimeter quantization
/// (stored value = round(depth_m * 1000)).
DepthMap read_depth_png16(const std::string& path);
void write_depth_png16(const std::string& path, const DepthMap& depth);

/// Grayscale PFM ("Pf"), 32-bit floats, bottom-to-top row order; the scale
/// sign encodes endianness.
DepthMap read_depth_pfm(const std::string& path);
void write_depth_pfm(const std::string& path, const DepthMap& depth);

}  // namespace dfd
