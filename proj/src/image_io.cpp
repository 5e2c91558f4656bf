// SPDX-License-Identifier: Apache-2.0
#include "hazediff/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

namespace hazediff {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

[[noreturn]] void fail(const std::string& what, const std::string& path) {
  throw std::runtime_error(what + ": " + path);
}

bool has_suffix(const std::string& s, const std::string& suffix) {
  if (s.size() < suffix.size()) return false;
  return std::equal(suffix.rbegin(), suffix.rend(), s.rbegin(),
                    [](char a, char b) { return std::tolower(a) == std::tolower(b); });
}

struct PngData {
  int height = 0;
  int width = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<uint8_t> bytes; // raw rows, top to bottom
};

PngData read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) fail("cannot open image", path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("libpng: read struct allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("libpng: info struct allocation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail("malformed PNG", path);
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);

  PngData out;
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.bit_depth = png_get_bit_depth(png, info);
  int color = png_get_color_type(png, info);

  if (color == PNG_COLOR_TYPE_GRAY) out.channels = 1;
  else if (color == PNG_COLOR_TYPE_RGB) out.channels = 3;
  else {
    png_destroy_read_struct(&png, &info, nullptr);
    fail("unsupported PNG color type (need gray or RGB)", path);
  }

  size_t row_bytes = png_get_rowbytes(png, info);
  out.bytes.resize(row_bytes * out.height);
  std::vector<png_bytep> rows(out.height);
  for (int y = 0; y < out.height; ++y) rows[y] = out.bytes.data() + y * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

} // namespace

ImageTensor load_image(const std::string& path) {
  PngData png = read_png(path);
  if (png.bit_depth != 8) fail("unsupported PNG bit depth (need 8-bit)", path);

  ImageTensor img(png.height, png.width, png.channels);
  const size_t n = img.size();
  for (size_t i = 0; i < n; ++i) img.data()[i] = png.bytes[i] / 255.0f;
  return img;
}

void save_image(const ImageTensor& img, const std::string& path) {
  if (img.channels() != 1 && img.channels() != 3)
    throw std::invalid_argument("save_image: channels must be 1 or 3");

  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) fail("cannot write image", path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("libpng: write struct allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("libpng: info struct allocation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail("PNG write failed", path);
  }

  png_init_io(png, fp.get());
  png_set_compression_level(png, 6); // fixed so outputs are reproducible
  png_set_IHDR(png, info, img.width(), img.height(), 8,
               img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<uint8_t> row(static_cast<size_t>(img.width()) * img.channels());
  for (int y = 0; y < img.height(); ++y) {
    const float* src = img.pixel(y, 0);
    for (size_t i = 0; i < row.size(); ++i) {
      float v = src[i];
      v = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
      row[i] = static_cast<uint8_t>(std::lround(v * 255.0f));
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

namespace {

DepthMap load_depth_png(const std::string& path) {
  PngData png = read_png(path);
  if (png.bit_depth != 16 || png.channels != 1)
    fail("depth PNG must be 16-bit grayscale", path);

  DepthMap map(png.height, png.width, 1);
  const uint8_t* b = png.bytes.data();
  for (size_t i = 0; i < map.size(); ++i) {
    uint16_t v = static_cast<uint16_t>((b[2 * i] << 8) | b[2 * i + 1]); // PNG is big-endian
    map.data()[i] = v / 65535.0f;
  }
  return map;
}

DepthMap load_depth_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open depth map", path);

  std::string magic;
  in >> magic;
  if (magic != "Pf") fail("PFM must be single-channel (magic 'Pf')", path);
  int w = 0, h = 0;
  double scale = 0.0;
  in >> w >> h >> scale;
  if (!in || w < 1 || h < 1 || scale == 0.0) fail("malformed PFM header", path);
  in.get(); // single whitespace byte before the raster

  const bool little_endian = scale < 0.0;
  const float mag = static_cast<float>(std::abs(scale));

  DepthMap map(h, w, 1);
  std::vector<uint8_t> row(static_cast<size_t>(w) * 4);
  // PFM stores scanlines bottom-to-top.
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (!in) fail("truncated PFM raster", path);
    for (int x = 0; x < w; ++x) {
      uint32_t u;
      if (little_endian)
        u = row[4 * x] | (row[4 * x + 1] << 8) | (row[4 * x + 2] << 16) |
            (static_cast<uint32_t>(row[4 * x + 3]) << 24);
      else
        u = (static_cast<uint32_t>(row[4 * x]) << 24) | (row[4 * x + 1] << 16) |
            (row[4 * x + 2] << 8) | row[4 * x + 3];
      float f;
      std::memcpy(&f, &u, 4);
      map.at(y, x, 0) = f * mag;
    }
  }
  return map;
}

} // namespace

DepthMap load_depth(const std::string& path) {
  DepthMap map = has_suffix(path, ".pfm") ? load_depth_pfm(path) : load_depth_png(path);
  for (size_t i = 0; i < map.size(); ++i) {
    float v = map.data()[i];
    if (!(v >= 0.0f) || !std::isfinite(v))
      fail("depth map contains negative or non-finite values", path);
  }
  return map;
}

void save_pfm(const DepthMap& map, const std::string& path) {
  if (map.channels() != 1) throw std::invalid_argument("save_pfm: single channel only");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write depth map", path);

  out << "Pf\n" << map.width() << " " << map.height() << "\n-1.0\n";
  std::vector<uint8_t> row(static_cast<size_t>(map.width()) * 4);
  for (int y = map.height() - 1; y >= 0; --y) {
    for (int x = 0; x < map.width(); ++x) {
      float f = map.at(y, x, 0);
      uint32_t u;
      std::memcpy(&u, &f, 4);
      row[4 * x] = u & 0xff;
      row[4 * x + 1] = (u >> 8) & 0xff;
      row[4 * x + 2] = (u >> 16) & 0xff;
      row[4 * x + 3] = (u >> 24) & 0xff;
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) fail("PFM write failed", path);
}

} // namespace hazediff
