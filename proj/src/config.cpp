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


#include "icosweep/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "icosweep/error.hpp"

namespace icosweep {

double RunConfig::lr_at(int iteration) const {
  double r = lr;
  for (int b : lr_boundaries) {
    if (iteration >= b) r *= lr_decay;
  }
  return r;
}

void RunConfig::validate() const {
  if (level < 3) throw ValidationError("config: level must be >= 3");
  if (level > 9) throw ValidationError("config: level must be <= 9");
  if (N < 2) throw ValidationError("config: N must be >= 2");
  if (!(d_min > 0)) throw ValidationError("config: d_min must be positive");
  if (!(eps > 0)) throw ValidationError("config: eps must be positive");
  if (c_feat < 1) throw ValidationError("config: c_feat must be >= 1");
  if (!(lr > 0) || !(lr_decay > 0)) throw ValidationError("config: learning rates must be positive");
  if (iterations < 0) throw ValidationError("config: iterations must be >= 0");
  if (batch_size < 1) throw ValidationError("config: batch_size must be >= 1");
  if (!(fov > 0 && fov < 360)) throw ValidationError("config: fov must lie in (0, 360)");
  if (image_size < 16) throw ValidationError("config: image_size must be >= 16");
  if (supersample < 1) throw ValidationError("config: supersample must be >= 1");
  if (!(color_jitter >= 0 && color_jitter < 1)) throw ValidationError("config: color_jitter must lie in [0, 1)");
  if (val_every < 1) throw ValidationError("config: val_every must be >= 1");
  if (train_scenes.empty()) throw ValidationError("config: train_scenes is empty");
  for (double p : pitches) {
    if (!(p >= 0 && p <= 90)) throw ValidationError("config: pitches must lie in [0, 90]");
  }
  if (!rig.empty() && !std::filesystem::exists(resolve(rig))) {
    throw ValidationError("config: rig file not found: " + resolve(rig));
  }
}

std::string RunConfig::resolve(const std::string& path) const {
  if (path.empty() || base_dir.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base_dir) / path).string();
}

namespace {

template <class V>
V scalar(const std::string& s, int line, const std::string& key) {
  std::istringstream in(s);
  V v;
  std::string rest;
  if (!(in >> v) || (in >> rest)) throw ParseError("bad value for '" + key + "'", line);
  return v;
}

template <class V>
std::vector<V> list(const std::string& s, int line, const std::string& key) {
  std::string t = s;
  for (char& c : t) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(t);
  std::vector<V> out;
  V v;
  while (in >> v) out.push_back(v);
  if (!in.eof()) throw ParseError("bad list for '" + key + "'", line);
  return out;
}

std::string trim(std::string s) {
  s.erase(0, s.find_first_not_of(" \t\r"));
  s.erase(s.find_last_not_of(" \t\r") + 1);
  return s;
}

}  // namespace

RunConfig parse_config(std::string_view text, const std::string& base_dir) {
  RunConfig c;
  c.base_dir = base_dir;
  std::istringstream all{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(all, raw)) {
    ++line;
    if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
    if (trim(raw).empty()) continue;
    const auto eq = raw.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line);
    const std::string key = trim(raw.substr(0, eq));
    const std::string val = trim(raw.substr(eq + 1));
    if (key == "level") c.level = scalar<int>(val, line, key);
    else if (key == "N") c.N = scalar<int>(val, line, key);
    else if (key == "d_min") c.d_min = scalar<double>(val, line, key);
    else if (key == "eps") c.eps = scalar<double>(val, line, key);
    else if (key == "c_feat") c.c_feat = scalar<int>(val, line, key);
    else if (key == "lr") c.lr = scalar<double>(val, line, key);
    else if (key == "lr_boundaries") c.lr_boundaries = list<int>(val, line, key);
    else if (key == "lr_decay") c.lr_decay = scalar<double>(val, line, key);
    else if (key == "iterations") c.iterations = scalar<int>(val, line, key);
    else if (key == "batch_size") c.batch_size = scalar<int>(val, line, key);
    else if (key == "seed") c.seed = scalar<std::uint64_t>(val, line, key);
    else if (key == "rig") c.rig = val;
    else if (key == "weights") c.weights = val;
    else if (key == "train_scenes") c.train_scenes = list<std::uint64_t>(val, line, key);
    else if (key == "val_scenes") c.val_scenes = list<std::uint64_t>(val, line, key);
    else if (key == "pitches") c.pitches = list<double>(val, line, key);
    else if (key == "fov") c.fov = scalar<double>(val, line, key);
    else if (key == "image_size") c.image_size = scalar<int>(val, line, key);
    else if (key == "supersample") c.supersample = scalar<int>(val, line, key);
    else if (key == "baseline") c.baseline = scalar<double>(val, line, key);
    else if (key == "val_every") c.val_every = scalar<int>(val, line, key);
    else if (key == "validity_channel") c.validity_channel = scalar<int>(val, line, key) != 0;
    else if (key == "color_jitter") c.color_jitter = scalar<double>(val, line, key);
    else throw ParseError("unknown key '" + key + "'", line);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), std::filesystem::path(path).parent_path().string());
}

std::string format_config(const RunConfig& c) {
  std::ostringstream o;
  o.precision(17);
  auto join = [&](const auto& v) {
    std::ostringstream s;
    s.precision(17);
    for (std::size_t i = 0; i < v.size(); ++i) s << (i ? ", " : "") << v[i];
    return s.str();
  };
  o << "level = " << c.level << "\nN = " << c.N << "\nd_min = " << c.d_min << "\neps = " << c.eps
    << "\nc_feat = " << c.c_feat << "\nlr = " << c.lr << "\nlr_boundaries = " << join(c.lr_boundaries)
    << "\nlr_decay = " << c.lr_decay << "\niterations = " << c.iterations << "\nbatch_size = " << c.batch_size
    << "\nseed = " << c.seed << "\n";
  if (!c.rig.empty()) o << "rig = " << c.rig << "\n";
  o << "weights = " << c.weights << "\ntrain_scenes = " << join(c.train_scenes)
    << "\nval_scenes = " << join(c.val_scenes) << "\npitches = " << join(c.pitches) << "\nfov = " << c.fov
    << "\nimage_size = " << c.image_size << "\nsupersample = " << c.supersample << "\nbaseline = " << c.baseline
    << "\nval_every = " << c.val_every << "\nvalidity_channel = " << int(c.validity_channel)
    << "\ncolor_jitter = " << c.color_jitter << "\n";
  return o.str();
}

}  // namespace icosweep
