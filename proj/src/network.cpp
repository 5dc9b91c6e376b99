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


#include "icosweep/network.hpp"

#include <cmath>

#include "icosweep/archive.hpp"
#include "icosweep/error.hpp"

namespace icosweep::nn {

const CrownIndex& CrownCharts::at(int lvl) const {
  const int k = level - lvl;
  require(k >= 0 && k <= 2, "CrownCharts: level out of range");
  return index[std::size_t(k)];
}

CrownCharts make_crown_charts(const Icosphere& ico) {
  require(ico.level >= 2, "make_crown_charts: input level must be >= 2");
  CrownCharts c;
  c.level = ico.level;
  for (int k = 0; k < 3; ++k) c.index[std::size_t(k)] = CrownIndex(build_chart(ico, ico.level - k));
  return c;
}

template <class T>
ConvLayer<T> make_conv_layer(const std::string& name, int out_c, int in_c, bool is3d, std::mt19937_64& rng) {
  require(out_c > 0 && in_c > 0, "make_conv_layer: channel counts must be positive");
  Shape ws = {std::size_t(out_c), std::size_t(in_c), 3, 3};
  if (is3d) ws.push_back(3);
  Tensor<T> w(ws);
  const double fan_in = double(in_c) * (is3d ? 27.0 : 9.0);
  std::uniform_real_distribution<double> u(-1.0 / std::sqrt(fan_in), 1.0 / std::sqrt(fan_in));
  for (auto& v : w.values()) v = T(u(rng));
  ConvLayer<T> l;
  l.weight = Parameter<T>(name + ".weight", std::move(w));
  l.bias = Parameter<T>(name + ".bias", Tensor<T>({std::size_t(out_c)}));
  return l;
}

namespace {

template <class T>
CrownVar apply(Graph<T>& g, const CrownVar& x, ConvLayer<T>& l, int stride) {
  return crown_conv(g, x, g.parameter(l.weight), g.parameter(l.bias), stride);
}

template <class T>
CrownVar resync(Graph<T>& g, const CrownVar& x, const CrownIndex& index) {
  return to_crown(g, from_crown(g, x, index), index);
}

}  // namespace

template <class T>
Extractor<T>::Extractor(const ExtractorConfig& cfg, std::mt19937_64& rng) : cfg_(cfg) {
  require(cfg.in_channels > 0 && cfg.stem_channels > 0 && cfg.feat_channels > 0, "Extractor: bad channel counts");
  require(cfg.stem_blocks >= 0 && cfg.feat_blocks >= 0, "Extractor: bad block counts");
  stem_ = make_conv_layer<T>("extractor.stem", cfg.stem_channels, cfg.in_channels, false, rng);
  for (int i = 0; i < cfg.stem_blocks; ++i) {
    const std::string n = "extractor.block" + std::to_string(i);
    stem_blocks_.push_back({make_conv_layer<T>(n + ".a", cfg.stem_channels, cfg.stem_channels, false, rng),
                            make_conv_layer<T>(n + ".b", cfg.stem_channels, cfg.stem_channels, false, rng)});
  }
  transition_ = make_conv_layer<T>("extractor.transition", cfg.feat_channels, cfg.stem_channels, false, rng);
  for (int i = 0; i < cfg.feat_blocks; ++i) {
    const std::string n = "extractor.feat_block" + std::to_string(i);
    feat_blocks_.push_back({make_conv_layer<T>(n + ".a", cfg.feat_channels, cfg.feat_channels, false, rng),
                            make_conv_layer<T>(n + ".b", cfg.feat_channels, cfg.feat_channels, false, rng)});
  }
  head_ = make_conv_layer<T>("extractor.head", cfg.feat_channels, cfg.feat_channels, false, rng);
}

template <class T>
CrownVar Extractor<T>::residual(Graph<T>& g, const CrownVar& x, Block& blk) {
  const CrownVar h = crown_relu(g, apply(g, x, blk.a, 1));
  return crown_relu(g, crown_add(g, x, apply(g, h, blk.b, 1)));
}

template <class T>
Var Extractor<T>::forward(Graph<T>& g, Var image, const CrownCharts& charts) {
  const int l = charts.level;
  const Shape& s = g.value(image).shape();
  require(s.size() == 2 && s[0] == vertex_count(l) && s[1] == std::size_t(cfg_.in_channels),
          "Extractor: image must be [V_l, C_in]");
  CrownVar x = to_crown(g, image, charts.at(l));
  x = crown_relu(g, apply(g, x, stem_, 2));
  x = resync(g, x, charts.at(l - 1));
  for (Block& b : stem_blocks_) x = residual(g, x, b);
  x = crown_relu(g, apply(g, x, transition_, 2));
  x = resync(g, x, charts.at(l - 2));
  for (Block& b : feat_blocks_) x = residual(g, x, b);
  x = apply(g, x, head_, 1);
  return from_crown(g, x, charts.at(l - 2));
}

template <class T>
std::vector<Parameter<T>*> Extractor<T>::parameters() {
  std::vector<Parameter<T>*> p;
  auto add = [&](ConvLayer<T>& l) {
    p.push_back(&l.weight);
    p.push_back(&l.bias);
  };
  add(stem_);
  for (Block& b : stem_blocks_) {
    add(b.a);
    add(b.b);
  }
  add(transition_);
  for (Block& b : feat_blocks_) {
    add(b.a);
    add(b.b);
  }
  add(head_);
  return p;
}

template <class T>
Regularizer<T>::Regularizer(const std::vector<int>& channels, std::mt19937_64& rng) {
  require(channels.size() >= 2, "Regularizer: need input and output channel counts");
  for (std::size_t i = 0; i + 1 < channels.size(); ++i) {
    layers_.push_back(make_conv_layer<T>("regularizer.conv" + std::to_string(i), channels[i + 1], channels[i], true,
                                         rng));
  }
}

template <class T>
Var Regularizer<T>::forward(Graph<T>& g, Var volume, const CrownIndex& index) {
  const Shape& s = g.value(volume).shape();
  require(s.size() == 3 && s[0] == index.num_vertices(), "Regularizer: volume must be [V, N, F]");
  require(s[2] == std::size_t(layers_.front().in_channels()), "Regularizer: feature count mismatch");
  require(layers_.back().out_channels() == 1, "Regularizer: last layer must have one channel");
  CrownVar x = to_crown(g, volume, index);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = apply(g, x, layers_[i], 1);
    if (i + 1 < layers_.size()) x = crown_relu(g, x);
  }
  const Var v = from_crown(g, x, index);
  return reshape(g, v, Shape{s[0], s[1]});
}

template <class T>
std::vector<Parameter<T>*> Regularizer<T>::parameters() {
  std::vector<Parameter<T>*> p;
  for (ConvLayer<T>& l : layers_) {
    p.push_back(&l.weight);
    p.push_back(&l.bias);
  }
  return p;
}

namespace {

std::vector<int> regularizer_channels(const NetConfig& cfg) {
  std::vector<int> ch = {cfg.num_cameras * cfg.extractor.feat_channels + (cfg.validity_channel ? cfg.num_cameras : 0)};
  ch.insert(ch.end(), cfg.regularizer_hidden.begin(), cfg.regularizer_hidden.end());
  ch.push_back(1);
  return ch;
}

}  // namespace

template <class T>
IcoSweepNet<T>::IcoSweepNet(const NetConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), rng_(seed), extractor_(cfg.extractor, rng_), regularizer_(regularizer_channels(cfg), rng_) {}

template <class T>
NetOutputs IcoSweepNet<T>::forward(Graph<T>& g, const std::vector<Var>& images, const SweepPlan& plan,
                                   const CrownCharts& charts) {
  require(images.size() == std::size_t(cfg_.num_cameras), "IcoSweepNet: one image per camera required");
  require(plan.level == charts.level - 2, "IcoSweepNet: sweep plan level must be input level - 2");
  require(plan.validity_channel == cfg_.validity_channel, "IcoSweepNet: validity channel setting differs from plan");
  NetOutputs o;
  for (Var im : images) o.features.push_back(extractor_.forward(g, im, charts));
  o.volume = cost_volume(g, o.features, plan);
  o.scores = regularizer_.forward(g, o.volume, charts.at(plan.level));
  o.index = soft_argmax(g, o.scores);
  return o;
}

template <class T>
std::vector<Parameter<T>*> IcoSweepNet<T>::parameters() {
  auto p = extractor_.parameters();
  for (auto* q : regularizer_.parameters()) p.push_back(q);
  return p;
}

template <class T>
Adam<T>::Adam(std::vector<Parameter<T>*> params, double beta1, double beta2, double eps)
    : params_(std::move(params)), b1_(beta1), b2_(beta2), eps_(eps) {
  for (auto* p : params_) {
    m_.emplace_back(p->value.size(), 0.0);
    v_.emplace_back(p->value.size(), 0.0);
  }
}

template <class T>
void Adam<T>::step(double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, t_);
  const double c2 = 1.0 - std::pow(b2_, t_);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter<T>& p = *params_[k];
    if (p.grad.size() != p.value.size()) p.zero_grad();
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double gi = double(p.grad[i]);
      m_[k][i] = b1_ * m_[k][i] + (1.0 - b1_) * gi;
      v_[k][i] = b2_ * v_[k][i] + (1.0 - b2_) * gi * gi;
      const double mh = m_[k][i] / c1, vh = v_[k][i] / c2;
      p.value[i] = T(double(p.value[i]) - lr * mh / (std::sqrt(vh) + eps_));
    }
    p.zero_grad();
  }
}

template <class T>
void zero_grad(const std::vector<Parameter<T>*>& params) {
  for (auto* p : params) p->zero_grad();
}

template <class T>
void save_weights(const std::string& path, const std::vector<Parameter<T>*>& params) {
  std::vector<ArchiveTensor> ts;
  for (auto* p : params) ts.push_back(to_archive(p->name, p->value));
  write_archive(path, ts);
}

template <class T>
void load_weights(const std::string& path, const std::vector<Parameter<T>*>& params) {
  const auto ts = read_archive(path);
  for (auto* p : params) {
    const ArchiveTensor* a = nullptr;
    for (const auto& t : ts) {
      if (t.name == p->name) a = &t;
    }
    if (!a) throw ValidationError("weights file " + path + " lacks tensor " + p->name);
    if (a->shape != p->value.shape()) {
      throw ValidationError("weights tensor " + p->name + " has shape " + shape_string(a->shape) + ", expected " +
                            shape_string(p->value.shape()));
    }
    p->value = from_archive<T>(*a);
    p->zero_grad();
  }
}

template <class T>
std::vector<Tensor<T>> snapshot(const std::vector<Parameter<T>*>& params) {
  std::vector<Tensor<T>> v;
  for (auto* p : params) v.push_back(p->value);
  return v;
}

template <class T>
void restore(const std::vector<Parameter<T>*>& params, const std::vector<Tensor<T>>& values) {
  require(params.size() == values.size(), "restore: parameter count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

#define ICOSWEEP_INSTANTIATE(T)                                                                            \
  template ConvLayer<T> make_conv_layer<T>(const std::string&, int, int, bool, std::mt19937_64&);         \
  template class Extractor<T>;                                                                             \
  template class Regularizer<T>;                                                                           \
  template class IcoSweepNet<T>;                                                                           \
  template class Adam<T>;                                                                                  \
  template void zero_grad<T>(const std::vector<Parameter<T>*>&);                                           \
  template void save_weights<T>(const std::string&, const std::vector<Parameter<T>*>&);                    \
  template void load_weights<T>(const std::string&, const std::vector<Parameter<T>*>&);                    \
  template std::vector<Tensor<T>> snapshot<T>(const std::vector<Parameter<T>*>&);                          \
  template void restore<T>(const std::vector<Parameter<T>*>&, const std::vector<Tensor<T>>&);

ICOSWEEP_INSTANTIATE(float)
ICOSWEEP_INSTANTIATE(double)
#undef ICOSWEEP_INSTANTIATE

}  // namespace icosweep::nn
