// SPDX-License-Identifier: Apache-2.0
#include "dfd/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include "dfd/error.hpp"

namespace dfd {

namespace {

struct FileCloser {
  void operator()(std::FILE* fp) const {
    if (fp) std::fclose(fp);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_handler(png_structp png, png_const_charp msg) {
  *static_cast<std::string*>(png_get_error_ptr(png)) = msg ? msg : "libpng error";
  std::longjmp(png_jmpbuf(png), 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::string error;

  ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::string error;

  ~PngWriter() { png_destroy_write_struct(&png, &info); }
};

// Decodes any PNG into interleaved 16-bit samples (8-bit inputs are scaled
// by 257 so full range maps to full range), gray or RGB, alpha stripped.
void read_png_samples(const std::string& path, std::vector<std::uint16_t>& samples,
                      int& height, int& width, int& channels, int& bit_depth) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open PNG file: " + path);

  png_byte signature[8];
  if (std::fread(signature, 1, 8, fp.get()) != 8 ||
      png_sig_cmp(signature, 0, 8) != 0)
    throw IoError("not a PNG file: " + path);

  PngReader reader;
  reader.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &reader.error,
                                      png_error_handler, png_warning_handler);
  if (!reader.png) throw IoError("libpng allocation failed");
  reader.info = png_create_info_struct(reader.png);
  if (!reader.info) throw IoError("libpng allocation failed");

  if (setjmp(png_jmpbuf(reader.png)))
    throw IoError("PNG decode failed for " + path + ": " + reader.error);

  png_init_io(reader.png, fp.get());
  png_set_sig_bytes(reader.png, 8);
  png_read_info(reader.png, reader.info);

  width = static_cast<int>(png_get_image_width(reader.png, reader.info));
  height = static_cast<int>(png_get_image_height(reader.png, reader.info));
  bit_depth = png_get_bit_depth(reader.png, reader.info);
  const int color_type = png_get_color_type(reader.png, reader.info);

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(reader.png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
    png_set_expand_gray_1_2_4_to_8(reader.png);
  if (png_get_valid(reader.png, reader.info, PNG_INFO_tRNS))
    png_set_tRNS_to_alpha(reader.png);
  if (bit_depth < 16) png_set_expand_16(reader.png);  // unify to 16-bit samples
  png_set_strip_alpha(reader.png);

  png_read_update_info(reader.png, reader.info);
  channels = png_get_channels(reader.png, reader.info);
  if (channels != 1 && channels != 3)
    throw IoError("unsupported PNG channel count " + std::to_string(channels) +
                  " in " + path);

  const std::size_t row_bytes = png_get_rowbytes(reader.png, reader.info);
  std::vector<png_byte> rows(static_cast<std::size_t>(height) * row_bytes);
  std::vector<png_bytep> row_ptrs(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y)
    row_ptrs[static_cast<std::size_t>(y)] = rows.data() + y * row_bytes;
  png_read_image(reader.png, row_ptrs.data());
  png_read_end(reader.png, nullptr);

  samples.resize(static_cast<std::size_t>(height) * width * channels);
  for (int y = 0; y < height; ++y) {
    const png_byte* row = row_ptrs[static_cast<std::size_t>(y)];
    for (std::size_t i = 0;
         i < static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
         ++i) {
      // PNG stores 16-bit samples big-endian.
      samples[static_cast<std::size_t>(y) * width * channels + i] =
          static_cast<std::uint16_t>((row[2 * i] << 8) | row[2 * i + 1]);
    }
  }
}

void write_png_samples(const std::string& path,
                       const std::vector<std::uint16_t>& samples, int height,
                       int width, int channels, int bit_depth) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open PNG file for writing: " + path);

  PngWriter writer;
  writer.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &writer.error,
                                       png_error_handler, png_warning_handler);
  if (!writer.png) throw IoError("libpng allocation failed");
  writer.info = png_create_info_struct(writer.png);
  if (!writer.info) throw IoError("libpng allocation failed");

  if (setjmp(png_jmpbuf(writer.png)))
    throw IoError("PNG encode failed for " + path + ": " + writer.error);

  png_init_io(writer.png, fp.get());
  png_set_IHDR(writer.png, writer.info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), bit_depth,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(writer.png, writer.info);

  const std::size_t values_per_row =
      static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
  const std::size_t bytes_per_row = values_per_row * (bit_depth == 16 ? 2 : 1);
  std::vector<png_byte> row(bytes_per_row);
  for (int y = 0; y < height; ++y) {
    const std::uint16_t* src = samples.data() + static_cast<std::size_t>(y) *
                                                     values_per_row;
    if (bit_depth == 16) {
      for (std::size_t i = 0; i < values_per_row; ++i) {
        row[2 * i] = static_cast<png_byte>(src[i] >> 8);
        row[2 * i + 1] = static_cast<png_byte>(src[i] & 0xff);
      }
    } else {
      for (std::size_t i = 0; i < values_per_row; ++i)
        row[i] = static_cast<png_byte>(src[i]);
    }
    png_write_row(writer.png, row.data());
  }
  png_write_end(writer.png, nullptr);
}

std::uint16_t quantize(double v, int maxval) {
  const double clamped = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint16_t>(std::lround(clamped * maxval));
}

}  // namespace

Image read_image_png(const std::string& path) {
  std::vector<std::uint16_t> samples;
  int height = 0, width = 0, channels = 0, bit_depth = 0;
  read_png_samples(path, samples, height, width, channels, bit_depth);
  Image img(height, width, channels);
  for (std::size_t i = 0; i < samples.size(); ++i)
    img.data[i] = samples[i] / 65535.0;
  return img;
}

void write_image_png(const std::string& path, const Image& img, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16)
    throw DomainError("PNG bit depth must be 8 or 16, got " +
                      std::to_string(bit_depth));
  if (auto bad = validate(img)) throw DomainError("write_image_png: " + *bad);
  const int maxval = bit_depth == 16 ? 65535 : 255;
  std::vector<std::uint16_t> samples(img.data.size());
  for (std::size_t i = 0; i < img.data.size(); ++i)
    samples[i] = quantize(img.data[i], maxval);
  write_png_samples(path, samples, img.height, img.width, img.channels, bit_depth);
}

DepthMap read_depth_png16(const std::string& path) {
  std::vector<std::uint16_t> samples;
  int height = 0, width = 0, channels = 0, bit_depth = 0;
  read_png_samples(path, samples, height, width, channels, bit_depth);
  if (channels != 1)
    throw IoError("depth PNG must be grayscale: " + path);
  if (bit_depth != 16)
    throw IoError("depth PNG must be 16-bit: " + path);
  DepthMap depth(height, width);
  for (std::size_t i = 0; i < samples.size(); ++i)
    depth.data[i] = samples[i] / 1000.0;  // millimeters to meters
  return depth;
}

void write_depth_png16(const std::string& path, const DepthMap& depth) {
  std::vector<std::uint16_t> samples(depth.data.size());
  for (std::size_t i = 0; i < depth.data.size(); ++i) {
    const double mm = std::round(depth.data[i] * 1000.0);
    if (!(mm >= 0.0) || mm > 65535.0)
      throw DomainError("depth value " + std::to_string(depth.data[i]) +
                        " m does not fit 16-bit millimeter encoding");
    samples[i] = static_cast<std::uint16_t>(mm);
  }
  write_png_samples(path, samples, depth.height, depth.width, 1, 16);
}

DepthMap read_depth_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open PFM file: " + path);

  std::string tag;
  int width = 0, height = 0;
  double scale = 0.0;
  in >> tag >> width >> height >> scale;
  if (!in) throw IoError("malformed PFM header: " + path);
  if (tag == "PF") throw IoError("color PFM is not supported: " + path);
  if (tag != "Pf") throw IoError("not a PFM file: " + path);
  if (width <= 0 || height <= 0) throw IoError("bad PFM dimensions: " + path);
  in.get();  // single whitespace after the scale

  std::vector<float> row(static_cast<std::size_t>(width));
  DepthMap depth(height, width);
  const bool file_little_endian = scale < 0.0;
  const bool host_little_endian = std::endian::native == std::endian::little;
  for (int y = height - 1; y >= 0; --y) {  // rows are stored bottom-to-top
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!in) throw IoError("truncated PFM data: " + path);
    for (int x = 0; x < width; ++x) {
      float v = row[static_cast<std::size_t>(x)];
      if (file_little_endian != host_little_endian) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        bits = __builtin_bswap32(bits);
        std::memcpy(&v, &bits, 4);
      }
      depth.at(y, x) = v;
    }
  }
  return depth;
}

void write_depth_pfm(const std::string& path, const DepthMap& depth) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open PFM file for writing: " + path);
  const bool host_little_endian = std::endian::native == std::endian::little;
  out << "Pf\n" << depth.width << " " << depth.height << "\n"
      << (host_little_endian ? "-1.0" : "1.0") << "\n";
  std::vector<float> row(static_cast<std::size_t>(depth.width));
  for (int y = depth.height - 1; y >= 0; --y) {
    for (int x = 0; x < depth.width; ++x)
      row[static_cast<std::size_t>(x)] = static_cast<float>(depth.at(y, x));
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw IoError("failed writing PFM: " + path);
}

}  // namespace dfd
