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

#pragma once

#include <optional>
#include <string>
#include <vector>

namespace icosweep {

/// Interleaved float image; pixel (u, v) is column u, row v.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> data;

  Image() = default;
  Image(int w, int h, int c, float fill = 0.0f)
      : width(w), height(h), channels(c), data(std::size_t(w) * h * c, fill) {}

  float& at(int u, int v, int ch) { return data[(std::size_t(v) * width + u) * channels + ch]; }
  float at(int u, int v, int ch) const { return data[(std::size_t(v) * width + u) * channels + ch]; }
  bool contains(double u, double v) const { return u >= 0 && v >= 0 && u <= width - 1 && v <= height - 1; }
};

/// Bilinear blend of the four pixels around (u, v); nullopt when outside
/// [0, width-1] x [0, height-1]. Writes `channels` values into `out`.
bool bilinear_sample(const Image& img, double u, double v, float* out);
std::optional<std::vector<float>> bilinear_sample(const Image& img, double u, double v);

/// 8-bit PNG (gray, gray+alpha, RGB or RGBA); values normalised to [0, 1].
/// Alpha is dropped.
Image read_png(const std::string& path);
/// Writes 1 or 3 channel images, clamping to [0, 1] and rounding to 8 bits.
void write_png(const std::string& path, const Image& img);

/// Portable float map, little-endian (scale -1.0), 1 or 3 channels.
void write_pfm(const std::string& path, const Image& img);
Image read_pfm(const std::string& path);

/// Binary 8-bit PGM of a single-channel image scaled by [lo, hi].
void write_pgm(const std::string& path, const Image& img, float lo, float hi);

}  // namespace icosweep
