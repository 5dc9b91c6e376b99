// Copyright 2026 The icosweep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "icosweep/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "icosweep/error.hpp"

namespace icosweep {

bool bilinear_sample(const Image& img, double u, double v, float* out) {
  if (!img.contains(u, v)) return false;
  const int u0 = std::min(int(std::floor(u)), img.width - 1);
  const int v0 = std::min(int(std::floor(v)), img.height - 1);
  const int u1 = std::min(u0 + 1, img.width - 1);
  const int v1 = std::min(v0 + 1, img.height - 1);
  const double fu = u - u0;
  const double fv = v - v0;
  for (int ch = 0; ch < img.channels; ++ch) {
    const double top = (1.0 - fu) * img.at(u0, v0, ch) + fu * img.at(u1, v0, ch);
    const double bottom = (1.0 - fu) * img.at(u0, v1, ch) + fu * img.at(u1, v1, ch);
    out[ch] = float((1.0 - fv) * top + fv * bottom);
  }
  return true;
}

std::optional<std::vector<float>> bilinear_sample(const Image& img, double u, double v) {
  std::vector<float> out(img.channels);
  if (!bilinear_sample(img, u, v, out.data())) return std::nullopt;
  return out;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_file(const std::string& path, const char* mode) {
  File f(std::fopen(path.c_str(), mode));
  if (!f) throw std::runtime_error("cannot open " + path);
  return f;
}

}  // namespace

Image read_png(const std::string& path) {
  File f = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("malformed PNG: " + path);
  }
  png_init_io(png, f.get());
  png_read_info(png, info);
  png_set_strip_16(png);
  png_set_packing(png);
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const int w = int(png_get_image_width(png, info));
  const int h = int(png_get_image_height(png, info));
  const int c = int(png_get_channels(png, info));
  std::vector<png_byte> buf(std::size_t(w) * h * c);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y) rows[y] = buf.data() + std::size_t(y) * w * c;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  Image img(w, h, c);
  for (std::size_t i = 0; i < buf.size(); ++i) img.data[i] = float(buf[i]) / 255.0f;
  return img;
}

void write_png(const std::string& path, const Image& img) {
  require(img.channels == 1 || img.channels == 3, "write_png: 1 or 3 channels");
  File f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("PNG write failed: " + path);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row(std::size_t(img.width) * img.channels);
  for (int y = 0; y < img.height; ++y) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      const float x = std::clamp(img.data[std::size_t(y) * row.size() + i], 0.0f, 1.0f);
      row[i] = png_byte(std::lround(x * 255.0f));
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_pfm(const std::string& path, const Image& img) {
  require(img.channels == 1 || img.channels == 3, "write_pfm: 1 or 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << (img.channels == 3 ? "PF" : "Pf") << "\n" << img.width << " " << img.height << "\n-1.0\n";
  const std::size_t row = std::size_t(img.width) * img.channels;
  // Scanlines run bottom to top.
  for (int y = img.height - 1; y >= 0; --y) {
    for (std::size_t i = 0; i < row; ++i) {
      const float x = img.data[std::size_t(y) * row + i];
      unsigned char bytes[4];
      std::uint32_t bits;
      std::memcpy(&bits, &x, 4);
      for (int b = 0; b < 4; ++b) bytes[b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xFF);
      out.write(reinterpret_cast<const char*>(bytes), 4);
    }
  }
}

Image read_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string magic;
  int w = 0, h = 0;
  double scale = 0;
  in >> magic >> w >> h >> scale;
  in.get();
  if ((magic != "PF" && magic != "Pf") || w <= 0 || h <= 0) throw ParseError("bad PFM header in " + path);
  const int c = magic == "PF" ? 3 : 1;
  const bool little = scale < 0;
  Image img(w, h, c);
  const std::size_t row = std::size_t(w) * c;
  for (int y = h - 1; y >= 0; --y) {
    for (std::size_t i = 0; i < row; ++i) {
      unsigned char bytes[4];
      if (!in.read(reinterpret_cast<char*>(bytes), 4)) throw ParseError("truncated PFM " + path);
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= std::uint32_t(bytes[little ? b : 3 - b]) << (8 * b);
      std::memcpy(&img.data[std::size_t(y) * row + i], &bits, 4);
    }
  }
  return img;
}

void write_pgm(const std::string& path, const Image& img, float lo, float hi) {
  require(img.channels == 1, "write_pgm: single channel");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  const float span = hi > lo ? hi - lo : 1.0f;
  for (float x : img.data) {
    const float t = std::clamp((x - lo) / span, 0.0f, 1.0f);
    out.put(static_cast<char>(std::lround(t * 255.0f)));
  }
}

}  // namespace icosweep
