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

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "icosweep/autograd.hpp"
#include "icosweep/crown.hpp"
#include "icosweep/nnops.hpp"
#include "icosweep/sweep.hpp"

namespace icosweep::nn {

/// Crown gather plans for the three levels an extractor touches.
struct CrownCharts {
  int level = 0;  // input level l
  std::array<CrownIndex, 3> index;  // l, l-1, l-2

  const CrownIndex& at(int lvl) const;
};

/// Requires ico.level >= 2.
CrownCharts make_crown_charts(const Icosphere& ico);

template <class T>
struct ConvLayer {
  Parameter<T> weight;  // [Cout, Cin, 3, 3] or [Cout, Cin, 3, 3, 3]
  Parameter<T> bias;    // [Cout]

  int out_channels() const { return int(weight.value.dim(0)); }
  int in_channels() const { return int(weight.value.dim(1)); }
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero bias.
template <class T>
ConvLayer<T> make_conv_layer(const std::string& name, int out_c, int in_c, bool is3d, std::mt19937_64& rng);

struct ExtractorConfig {
  int in_channels = 3;
  int stem_channels = 16;
  int stem_blocks = 2;
  int feat_channels = 8;
  int feat_blocks = 1;
};

/// Crown ResNet: stride-2 stem, residual blocks, stride-2 transition,
/// residual blocks, linear head. Maps [V_l, C_in] to [V_{l-2}, C_feat] with
/// a from_crown/to_crown resynchronisation after each stride-2 layer.
template <class T>
class Extractor {
 public:
  Extractor(const ExtractorConfig& cfg, std::mt19937_64& rng);

  Var forward(Graph<T>& g, Var image, const CrownCharts& charts);
  std::vector<Parameter<T>*> parameters();
  const ExtractorConfig& config() const { return cfg_; }

 private:
  struct Block {
    ConvLayer<T> a, b;
  };
  CrownVar residual(Graph<T>& g, const CrownVar& x, Block& blk);

  ExtractorConfig cfg_;
  ConvLayer<T> stem_;
  std::vector<Block> stem_blocks_;
  ConvLayer<T> transition_;
  std::vector<Block> feat_blocks_;
  ConvLayer<T> head_;
};

/// Stack of 3D crown convolutions, ReLU between layers, over a [V, N, F]
/// volume (sphere axis as depth). channels = {F, hidden..., 1}.
template <class T>
class Regularizer {
 public:
  Regularizer(const std::vector<int>& channels, std::mt19937_64& rng);

  /// Returns the [V, N] score.
  Var forward(Graph<T>& g, Var volume, const CrownIndex& index);
  std::vector<Parameter<T>*> parameters();
  std::vector<ConvLayer<T>>& layers() { return layers_; }

 private:
  std::vector<ConvLayer<T>> layers_;
};

struct NetConfig {
  ExtractorConfig extractor;
  int num_cameras = 4;
  std::vector<int> regularizer_hidden = {16, 16};
  bool validity_channel = false;  // cost volume carries per-camera usability flags
};

/// Intermediate graph values of one forward pass.
struct NetOutputs {
  std::vector<Var> features;  // per camera [V_{l-2}, C_feat]
  Var volume;                 // [V, N, K*C_feat]
  Var scores;                 // [V, N]
  Var index;                  // [V]
};

template <class T>
class IcoSweepNet {
 public:
  IcoSweepNet(const NetConfig& cfg, std::uint64_t seed);

  /// images[k] is camera k's IcoImage [V_l, C_in] as a graph value.
  NetOutputs forward(Graph<T>& g, const std::vector<Var>& images, const SweepPlan& plan, const CrownCharts& charts);
  std::vector<Parameter<T>*> parameters();
  const NetConfig& config() const { return cfg_; }
  Extractor<T>& extractor() { return extractor_; }
  Regularizer<T>& regularizer() { return regularizer_; }

 private:
  NetConfig cfg_;
  std::mt19937_64 rng_;
  Extractor<T> extractor_;
  Regularizer<T> regularizer_;
};

/// Adam with bias correction.
template <class T>
class Adam {
 public:
  explicit Adam(std::vector<Parameter<T>*> params, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  /// Applies one update from the accumulated gradients, then zeroes them.
  void step(double lr);
  int steps() const { return t_; }

 private:
  std::vector<Parameter<T>*> params_;
  std::vector<std::vector<double>> m_, v_;
  double b1_, b2_, eps_;
  int t_ = 0;
};

template <class T>
void zero_grad(const std::vector<Parameter<T>*>& params);

/// CRWN weights file, one tensor per parameter in the precision of T.
template <class T>
void save_weights(const std::string& path, const std::vector<Parameter<T>*>& params);
/// Names and shapes must match; throws ValidationError otherwise.
template <class T>
void load_weights(const std::string& path, const std::vector<Parameter<T>*>& params);

/// Copies parameter values (snapshot/restore of best weights).
template <class T>
std::vector<Tensor<T>> snapshot(const std::vector<Parameter<T>*>& params);
template <class T>
void restore(const std::vector<Parameter<T>*>& params, const std::vector<Tensor<T>>& values);

}  // namespace icosweep::nn
