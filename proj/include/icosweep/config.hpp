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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace icosweep {

/// Run parameters read from a `key = value` file (`#` starts a comment).
struct RunConfig {
  int level = 4;  // input icosphere level; depth is estimated at level - 2
  int N = 8;
  double d_min = 0.55;
  double eps = 1e-6;
  int c_feat = 8;
  double lr = 1e-3;
  std::vector<int> lr_boundaries = {350};  // lr is multiplied by lr_decay at each boundary
  double lr_decay = 0.1;
  int iterations = 500;
  int batch_size = 1;
  std::uint64_t seed = 1;
  std::string rig;  // rig file; empty selects the built-in four-camera rig
  std::string weights = "weights.crwn";
  std::vector<std::uint64_t> train_scenes = {101, 102, 103, 104};
  std::vector<std::uint64_t> val_scenes = {201, 202};
  std::vector<double> pitches = {0, 15, 30, 45};
  double fov = 220.0;
  int image_size = 256;
  int supersample = 2;
  double baseline = 0.2;
  int val_every = 25;
  bool validity_channel = false;
  double color_jitter = 0.0;  // training-time per-camera gain/offset amplitude, 0 disables
  std::string base_dir;  // directory relative paths are resolved against

  double lr_at(int iteration) const;
  /// Throws ValidationError on an inconsistent configuration.
  void validate() const;
  /// Path relative to base_dir unless absolute or empty.
  std::string resolve(const std::string& path) const;
};

/// Throws ParseError (with line number) or ValidationError.
RunConfig parse_config(std::string_view text, const std::string& base_dir = "");
RunConfig load_config(const std::string& path);
std::string format_config(const RunConfig& cfg);

}  // namespace icosweep
