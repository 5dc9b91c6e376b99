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


#include "icosweep/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <sstream>

#include "icosweep/archive.hpp"
#include "icosweep/error.hpp"

namespace icosweep {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Adds elapsed time to *slot when timing is requested.
class Stopwatch {
 public:
  explicit Stopwatch(double* slot) : slot_(slot), t0_(Clock::now()) {}
  ~Stopwatch() {
    if (slot_) *slot_ += seconds_since(t0_);
  }

 private:
  double* slot_;
  Clock::time_point t0_;
};

double* slot(Timing* t, double Timing::*m) { return t ? &(t->*m) : nullptr; }

}  // namespace

std::string Timing::report() const {
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "render_s=%.4f\nprojection_s=%.4f\nextraction_s=%.4f\nsweep_s=%.4f\nregularize_s=%.4f\nregress_s=%.4f\n",
                render, projection, extraction, sweep, regularize, regress);
  return buf;
}

Tensor<float> image_tensor(const IcoImage& img) {
  Tensor<float> t({img.num_vertices(), std::size_t(img.channels)});
  for (std::size_t v = 0; v < img.num_vertices(); ++v) {
    if (!img.valid[v]) continue;
    for (int c = 0; c < img.channels; ++c) t[v * img.channels + c] = img.value(v, c) - 0.5f;
  }
  return t;
}

void jitter_colors(Tensor<float>& t, const IcoImage& img, float gain, float offset) {
  require(t.size() == img.num_vertices() * std::size_t(img.channels), "jitter_colors: shape mismatch");
  for (std::size_t v = 0; v < img.num_vertices(); ++v) {
    if (!img.valid[v]) continue;
    for (int c = 0; c < img.channels; ++c) t[v * img.channels + c] = t[v * img.channels + c] * gain + offset;
  }
}

Context::Context(const RunConfig& cfg)
    : cfg_(cfg),
      ico_(build_icosphere(cfg.level)),
      ico_out_(build_icosphere(cfg.level - 2)),
      charts_(nn::make_crown_charts(ico_)),
      spheres_(sphere_radii(cfg.N, cfg.d_min, cfg.eps)) {
  cfg_.validate();
}

CameraRig Context::rig(double pitch_deg) const {
  CameraRig r = cfg_.rig.empty() ? default_rig(cfg_.fov, cfg_.image_size, cfg_.baseline) : load_rig(cfg_.resolve(cfg_.rig));
  return pitch_deg == 0.0 ? r : rotate_rig(r, pitch_deg);
}

SweepCache Context::cache(const CameraRig& r, bool* rebuilt) const {
  return load_or_build_sweep_cache(r, ico_out_, spheres_, cache_dir_from_env(), rebuilt);
}

SweepPlan Context::plan(const CameraRig& r, const std::vector<IcoImage>& images) const {
  require(images.size() == r.cameras.size(), "plan: one image per camera required");
  std::vector<std::vector<std::uint8_t>> masks;
  for (const IcoImage& im : images) masks.push_back(im.valid);
  SweepPlan p = make_sweep_plan(cache(r), ico_out_, masks);
  p.validity_channel = cfg_.validity_channel;
  return p;
}

Sample Context::make_sample(const Scene& scene, const CameraRig& r, Timing* t) const {
  std::vector<Vec3> points = {r.center()};
  for (const Camera& c : r.cameras) points.push_back(c.extrinsics.t_wc());
  validate_scene(scene, points);
  Sample s;
  s.name = "scene" + std::to_string(scene.seed);
  for (const Camera& c : r.cameras) {
    Image img;
    {
      Stopwatch w(slot(t, &Timing::render));
      img = render_fisheye(scene, c.extrinsics, c.intrinsics, cfg_.supersample);
    }
    Stopwatch w(slot(t, &Timing::projection));
    s.images.push_back(project_to_icosphere(img, c.intrinsics, c.extrinsics, ico_));
  }
  s.gt_depth = gt_depth_ico(scene, r.center(), ico_out_);
  s.gt = gt_index_map(s.gt_depth, out_level(), cfg_.d_min, cfg_.N);
  return s;
}

Dataset Context::make_dataset(const CameraRig& r, const std::vector<std::uint64_t>& seeds, Timing* t) const {
  Dataset ds;
  ds.rig = r;
  const Vec3 center = r.center();
  for (std::uint64_t seed : seeds) ds.samples.push_back(make_sample(random_scene(seed, center), r, t));
  if (!ds.samples.empty()) {
    Stopwatch w(slot(t, &Timing::sweep));
    ds.plan = plan(r, ds.samples.front().images);
  }
  attach_masks(ds);
  return ds;
}

void Context::attach_masks(Dataset& ds) const {
  for (Sample& s : ds.samples) s.gt.mask = evaluation_mask(ds.plan, s.gt.indices);
}

nn::NetConfig Context::net_config(int num_cameras) const {
  nn::NetConfig n;
  n.num_cameras = num_cameras;
  n.extractor.feat_channels = cfg_.c_feat;
  n.validity_channel = cfg_.validity_channel;
  return n;
}

std::vector<double> predict(nn::IcoSweepNet<float>& net, const Context& ctx, const SweepPlan& plan, const Sample& s,
                            Timing* t) {
  nn::Graph<float> g;
  std::vector<nn::Var> feats;
  {
    Stopwatch w(slot(t, &Timing::extraction));
    for (const IcoImage& im : s.images) {
      feats.push_back(net.extractor().forward(g, g.constant(image_tensor(im)), ctx.charts()));
    }
  }
  nn::Var volume;
  {
    Stopwatch w(slot(t, &Timing::sweep));
    volume = nn::cost_volume(g, feats, plan);
  }
  nn::Var scores;
  {
    Stopwatch w(slot(t, &Timing::regularize));
    scores = net.regularizer().forward(g, volume, ctx.charts().at(plan.level));
  }
  Stopwatch w(slot(t, &Timing::regress));
  const nn::Var idx = nn::soft_argmax(g, scores);
  const Tensor<float>& v = g.value(idx);
  if (!v.all_finite()) throw NumericError("predict: non-finite depth index");
  return std::vector<double>(v.values().begin(), v.values().end());
}

Metrics evaluate(nn::IcoSweepNet<float>& net, const Context& ctx, const Dataset& ds, Timing* t) {
  std::vector<double> pred, gt;
  std::vector<std::uint8_t> mask;
  for (const Sample& s : ds.samples) {
    const auto p = predict(net, ctx, ds.plan, s, t);
    pred.insert(pred.end(), p.begin(), p.end());
    gt.insert(gt.end(), s.gt.indices.begin(), s.gt.indices.end());
    if (s.gt.mask.empty()) {
      mask.insert(mask.end(), p.size(), 1);
    } else {
      mask.insert(mask.end(), s.gt.mask.begin(), s.gt.mask.end());
    }
  }
  return metrics(pred, gt, mask, ctx.config().N);
}

double validation_loss(nn::IcoSweepNet<float>& net, const Context& ctx, const Dataset& ds) {
  require(!ds.samples.empty(), "validation_loss: empty dataset");
  double total = 0.0;
  for (const Sample& s : ds.samples) {
    DepthIndexMap p{s.gt.level, predict(net, ctx, ds.plan, s), {}};
    total += huber_loss(p, s.gt);
  }
  return total / double(ds.samples.size());
}

namespace {

std::string state_dump(const std::vector<nn::Parameter<float>*>& params, int iteration, double loss) {
  std::ostringstream o;
  o << "non-finite training loss " << loss << " at iteration " << iteration << "\n";
  for (const auto* p : params) {
    double vmax = 0.0, gsq = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      vmax = std::max(vmax, double(std::abs(p->value[i])));
      finite = finite && std::isfinite(p->value[i]);
    }
    for (std::size_t i = 0; i < p->grad.size(); ++i) gsq += double(p->grad[i]) * double(p->grad[i]);
    o << "  " << p->name << " max|w|=" << vmax << " |grad|=" << std::sqrt(gsq) << (finite ? "" : " NON-FINITE")
      << "\n";
  }
  return o.str();
}

}  // namespace

TrainResult train(nn::IcoSweepNet<float>& net, const Context& ctx, const Dataset& train_set, const Dataset* val_set,
                  std::ostream* log) {
  const RunConfig& cfg = ctx.config();
  require(!train_set.samples.empty(), "train: empty training set");
  TrainResult r;
  r.has_val = val_set && !val_set->samples.empty();
  auto params = net.parameters();
  nn::zero_grad(params);
  nn::Adam<float> adam(params);

  r.initial_train = evaluate(net, ctx, train_set);
  double best = std::numeric_limits<double>::infinity();
  std::vector<Tensor<float>> best_weights = nn::snapshot(params);
  auto validate = [&](int it) {
    if (!r.has_val) return;
    const double vl = validation_loss(net, ctx, *val_set);
    r.val_losses.emplace_back(it, vl);
    if (log) *log << "val " << it << " loss " << vl << "\n";
    if (vl < best) {
      best = vl;
      r.best_iteration = it;
      best_weights = nn::snapshot(params);
    }
  };
  if (r.has_val) r.initial_val = evaluate(net, ctx, *val_set);
  validate(0);

  const std::size_t n = train_set.samples.size();
  std::size_t cursor = 0;
  std::mt19937_64 jitter_rng(cfg.seed ^ 0x6a09e667f3bcc909ull);
  std::uniform_real_distribution<float> unit(-1.0f, 1.0f);
  const float jitter = float(cfg.color_jitter);
  for (int it = 0; it < cfg.iterations; ++it) {
    double loss = 0.0;
    for (int b = 0; b < cfg.batch_size; ++b) {
      const Sample& s = train_set.samples[cursor++ % n];
      nn::Graph<float> g;
      std::vector<nn::Var> images;
      for (const IcoImage& im : s.images) {
        Tensor<float> t = image_tensor(im);
        if (jitter > 0) {
          const float gain = 1.0f + jitter * unit(jitter_rng);
          jitter_colors(t, im, gain, 0.5f * jitter * unit(jitter_rng));
        }
        images.push_back(g.constant(std::move(t)));
      }
      const nn::NetOutputs out = net.forward(g, images, train_set.plan, ctx.charts());
      const Tensor<float> target = Tensor<double>({s.gt.indices.size()}, s.gt.indices).cast<float>();
      const nn::Var l = nn::huber_loss(g, out.index, target);
      const double lv = double(g.value(l)[0]);
      if (!std::isfinite(lv)) throw NumericError(state_dump(params, it, lv));
      loss += lv / cfg.batch_size;
      g.backward(l, Tensor<float>({1}, 1.0f / float(cfg.batch_size)));
    }
    r.losses.push_back(loss);
    adam.step(cfg.lr_at(it));
    if (log) *log << "iter " << it << " loss " << loss << " lr " << cfg.lr_at(it) << "\n";
    if ((it + 1) % cfg.val_every == 0 || it + 1 == cfg.iterations) validate(it + 1);
  }

  r.final_train = evaluate(net, ctx, train_set);
  if (r.has_val) {
    r.final_val = evaluate(net, ctx, *val_set);
    nn::restore(params, best_weights);
    r.selected_val = evaluate(net, ctx, *val_set);
    r.selected_train = evaluate(net, ctx, train_set);
  } else {
    r.best_iteration = cfg.iterations;
    r.selected_train = r.final_train;
  }
  return r;
}

void write_ico_image(const std::string& path, const IcoImage& img) {
  ArchiveTensor values{"values", DType::kF32, {img.num_vertices(), std::size_t(img.channels)},
                       std::vector<double>(img.values.begin(), img.values.end())};
  ArchiveTensor valid{"valid", DType::kU8, {img.num_vertices()}, std::vector<double>(img.valid.begin(), img.valid.end())};
  write_archive(path, {values, valid});
}

IcoImage read_ico_image(const std::string& path) {
  const auto ts = read_archive(path);
  const ArchiveTensor& v = find_tensor(ts, "values");
  const ArchiveTensor& m = find_tensor(ts, "valid");
  if (v.shape.size() != 2 || m.shape.size() != 1 || m.shape[0] != v.shape[0]) {
    throw ValidationError(path + ": inconsistent ico-feature shapes");
  }
  IcoImage img;
  img.level = level_for_vertex_count(v.shape[0]);
  img.channels = int(v.shape[1]);
  img.values.assign(v.values.begin(), v.values.end());
  img.valid.assign(m.values.begin(), m.values.end());
  return img;
}

void write_depth_index(const std::string& path, const DepthIndexMap& m) {
  std::vector<ArchiveTensor> ts = {{"indices", DType::kF64, {m.indices.size()}, m.indices}};
  if (!m.mask.empty()) {
    ts.push_back({"mask", DType::kU8, {m.mask.size()}, std::vector<double>(m.mask.begin(), m.mask.end())});
  }
  write_archive(path, ts);
}

DepthIndexMap read_depth_index(const std::string& path) {
  const auto ts = read_archive(path);
  const ArchiveTensor& ix = find_tensor(ts, "indices");
  if (ix.shape.size() != 1) throw ValidationError(path + ": indices must be one-dimensional");
  DepthIndexMap m;
  m.level = level_for_vertex_count(ix.shape[0]);
  m.indices = ix.values;
  for (const auto& t : ts) {
    if (t.name == "mask") m.mask.assign(t.values.begin(), t.values.end());
  }
  return m;
}

Vec3 erp_direction(int x, int y, int width, int height) {
  const double lat = kPi / 2 - kPi * double(y) / double(std::max(1, height - 1));
  const double lon = 2 * kPi * double(x) / double(width) - kPi;
  return Vec3(std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat));
}

Image render_erp(const std::vector<double>& values, const Icosphere& ico, int width, int height) {
  require(values.size() == ico.num_vertices(), "render_erp: one value per vertex required");
  require(width > 0 && height > 1, "render_erp: bad image size");
  Image out(width, height, 1);
  const auto& faces = ico.faces();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Location loc = locate(ico, erp_direction(x, y, width, height));
      const Face& f = faces[loc.face];
      double v = 0.0;
      for (int a = 0; a < 3; ++a) v += loc.weights[a] * values[f[a]];
      out.at(x, y, 0) = float(v);
    }
  }
  return out;
}

Image colormap(const Image& gray, double lo, double hi) {
  require(gray.channels == 1, "colormap: single-channel input required");
  Image out(gray.width, gray.height, 3);
  const double span = hi > lo ? hi - lo : 1.0;
  for (int y = 0; y < gray.height; ++y) {
    for (int x = 0; x < gray.width; ++x) {
      const double t = std::clamp((gray.at(x, y, 0) - lo) / span, 0.0, 1.0);
      out.at(x, y, 0) = float(std::clamp(1.5 - std::abs(4 * t - 3), 0.0, 1.0));
      out.at(x, y, 1) = float(std::clamp(1.5 - std::abs(4 * t - 2), 0.0, 1.0));
      out.at(x, y, 2) = float(std::clamp(1.5 - std::abs(4 * t - 1), 0.0, 1.0));
    }
  }
  return out;
}

}  // namespace icosweep
