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


// icosweep command-line driver.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "icosweep/archive.hpp"
#include "icosweep/camera.hpp"
#include "icosweep/config.hpp"
#include "icosweep/error.hpp"
#include "icosweep/image.hpp"
#include "icosweep/kernels.hpp"
#include "icosweep/network.hpp"
#include "icosweep/pipeline.hpp"
#include "icosweep/regress.hpp"
#include "icosweep/scenegen.hpp"
#include "icosweep/sweep.hpp"

namespace fs = std::filesystem;
using namespace icosweep;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool serial = false;
};

RunConfig load(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();
  return cfg;
}

CameraRig rig_from(const RunConfig& cfg, const std::string& rig_path, double pitch) {
  CameraRig rig = rig_path.empty() ? Context(cfg).rig(0.0) : load_rig(rig_path);
  return pitch == 0.0 ? rig : rotate_rig(rig, pitch);
}

// --- project ---------------------------------------------------------------

struct ProjectArgs {
  std::string rig;
  std::vector<std::string> images;
  std::optional<int> level;
  std::string out = ".";
  bool verify = false;
};

int cmd_project(const Common& c, const ProjectArgs& a) {
  const RunConfig cfg = load(c);
  const CameraRig rig = a.rig.empty() ? Context(cfg).rig() : load_rig(a.rig);
  if (a.images.size() != rig.cameras.size()) {
    std::cerr << "error: " << a.images.size() << " images given for a rig of " << rig.cameras.size()
              << " cameras\n";
    return kExitUsage;
  }
  const int level = a.level.value_or(cfg.level);
  if (level < 0 || level > kDefaultMaxLevel) throw ValidationError("level out of range");
  const Icosphere ico = build_icosphere(level);
  fs::create_directories(a.out);
  int failures = 0;
  for (std::size_t k = 0; k < rig.cameras.size(); ++k) {
    const Camera& cam = rig.cameras[k];
    if (!fs::exists(a.images[k])) throw ValidationError("missing image " + a.images[k]);
    const Image img = read_png(a.images[k]);
    const IcoImage ico_img = project_to_icosphere(img, cam.intrinsics, cam.extrinsics, ico);
    const std::string path = (fs::path(a.out) / (cam.name + ".ico")).string();
    write_ico_image(path, ico_img);
    std::size_t valid = 0;
    for (auto v : ico_img.valid) valid += v;
    std::cout << path << " vertices=" << ico_img.num_vertices() << " valid=" << valid << "\n";
    if (a.verify) {
      // Constant in-FoV input must give constant valid output.
      std::vector<float> lo(img.channels, 1e30f), hi(img.channels, -1e30f);
      for (int v = 0; v < img.height; ++v) {
        for (int u = 0; u < img.width; ++u) {
          if (!unproject(cam.intrinsics, Vec2(u, v))) continue;
          for (int ch = 0; ch < img.channels; ++ch) {
            lo[ch] = std::min(lo[ch], img.at(u, v, ch));
            hi[ch] = std::max(hi[ch], img.at(u, v, ch));
          }
        }
      }
      bool constant = true;
      for (int ch = 0; ch < img.channels; ++ch) constant = constant && hi[ch] == lo[ch];
      if (!constant) {
        std::cout << "verify " << cam.name << ": input not constant, skipped\n";
        continue;
      }
      double spread = 0.0;
      for (std::size_t v = 0; v < ico_img.num_vertices(); ++v) {
        if (!ico_img.valid[v]) continue;
        for (int ch = 0; ch < img.channels; ++ch) spread = std::max(spread, double(std::abs(ico_img.value(v, ch) - lo[ch])));
      }
      const bool ok = spread <= 1e-6;
      failures += !ok;
      std::cout << "verify " << cam.name << ": constant input, max deviation " << spread << (ok ? " OK" : " FAIL")
                << "\n";
    }
  }
  return failures ? 1 : 0;
}

// --- sweep-cache ------------------------------------------------------------

struct SweepArgs {
  std::string rig;
  std::string out;
  double pitch = 0.0;
};

int cmd_sweep_cache(const Common& c, const SweepArgs& a) {
  const RunConfig cfg = load(c);
  const CameraRig rig = rig_from(cfg, a.rig, a.pitch);
  const Icosphere ico = build_icosphere(cfg.level - 2);
  const SphereSet spheres = sphere_radii(cfg.N, cfg.d_min, cfg.eps);
  bool rebuilt = true;
  const SweepCache cache = load_or_build_sweep_cache(rig, ico, spheres, cache_dir_from_env(), &rebuilt);
  if (!a.out.empty()) write_sweep_cache(a.out, cache);
  std::size_t valid = 0;
  for (const auto& e : cache.entries) valid += e.valid;
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(cache.rig_hash));
  std::cout << "level=" << cache.level << "\nN=" << cache.num_spheres << "\ncameras=" << cache.num_cameras
            << "\nentries=" << cache.entries.size() << "\nvalid=" << valid << "\nrig_hash=" << hash
            << "\nsource=" << (rebuilt ? "built" : "loaded") << "\n";
  return 0;
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
  std::string weights;
  std::string log;
  std::optional<int> iterations;
};

void print_metrics(const char* prefix, const Metrics& m) {
  std::printf("%s_mae=%.6f\n%s_rms=%.6f\n%s_gt1=%.4f\n%s_gt3=%.4f\n%s_gt5=%.4f\n", prefix, m.mae, prefix, m.rms, prefix,
              m.gt1, prefix, m.gt3, prefix, m.gt5);
}

int cmd_train(const Common& c, const TrainArgs& a) {
  RunConfig cfg = load(c);
  if (a.iterations) cfg.iterations = *a.iterations;
  cfg.validate();
  const std::string weights = a.weights.empty() ? cfg.resolve(cfg.weights) : a.weights;
  const Context ctx(cfg);
  Timing timing;
  const CameraRig rig = ctx.rig();
  const Dataset train_set = ctx.make_dataset(rig, cfg.train_scenes, &timing);
  const Dataset val_set = ctx.make_dataset(rig, cfg.val_scenes, &timing);
  nn::IcoSweepNet<float> net(ctx.net_config(int(rig.cameras.size())), cfg.seed);
  const std::string log_path = a.log.empty() ? weights + ".log" : a.log;
  std::ofstream log(log_path);
  if (!log) throw ValidationError("cannot write " + log_path);
  log.precision(9);
  const TrainResult r = train(net, ctx, train_set, val_set.samples.empty() ? nullptr : &val_set, &log);
  nn::save_weights(weights, net.parameters());
  std::printf("weights=%s\nlog=%s\niterations=%d\nselected_iteration=%d\n", weights.c_str(), log_path.c_str(),
              cfg.iterations, r.best_iteration);
  print_metrics("initial_train", r.initial_train);
  print_metrics("final_train", r.final_train);
  print_metrics("train", r.selected_train);
  if (r.has_val) {
    print_metrics("initial_val", r.initial_val);
    print_metrics("val", r.selected_val);
  }
  std::cout << timing.report();
  return 0;
}

// --- infer ------------------------------------------------------------------

struct InferArgs {
  std::string weights;
  std::string rig;
  std::vector<std::string> images;
  std::string scene;
  std::optional<std::uint64_t> scene_seed;
  double pitch = 0.0;
  std::string out = "depth.crwn";
};

int cmd_infer(const Common& c, const InferArgs& a) {
  const RunConfig cfg = load(c);
  const Context ctx(cfg);
  Timing timing;
  const CameraRig rig = rig_from(cfg, a.rig, a.pitch);
  Sample s;
  if (!a.images.empty()) {
    if (a.images.size() != rig.cameras.size()) {
      std::cerr << "error: " << a.images.size() << " images given for a rig of " << rig.cameras.size()
                << " cameras\n";
      return kExitUsage;
    }
    for (std::size_t k = 0; k < rig.cameras.size(); ++k) {
      const Image img = read_png(a.images[k]);
      const Camera& cam = rig.cameras[k];
      const auto t0 = std::chrono::steady_clock::now();
      s.images.push_back(project_to_icosphere(img, cam.intrinsics, cam.extrinsics, ctx.ico()));
      timing.projection += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  } else if (!a.scene.empty() || a.scene_seed) {
    const Scene scene = a.scene.empty() ? random_scene(*a.scene_seed, rig.center()) : load_scene_file(a.scene);
    s = ctx.make_sample(scene, rig, &timing);
  } else {
    std::cerr << "error: infer needs --images or --scene/--scene-seed\n";
    return kExitUsage;
  }
  nn::IcoSweepNet<float> net(ctx.net_config(int(rig.cameras.size())), cfg.seed);
  nn::load_weights(a.weights.empty() ? cfg.resolve(cfg.weights) : a.weights, net.parameters());
  const SweepPlan plan = ctx.plan(rig, s.images);
  DepthIndexMap out{ctx.out_level(), predict(net, ctx, plan, s, &timing), {}};
  if (!s.gt.indices.empty()) {
    s.gt.mask = evaluation_mask(plan, s.gt.indices);
    out.mask = s.gt.mask;
    print_metrics("scene", metrics(out.indices, s.gt.indices, s.gt.mask, cfg.N));
  }
  write_depth_index(a.out, out);
  std::cout << "output=" << a.out << "\nvertices=" << out.indices.size() << "\n" << timing.report();
  return 0;
}

// --- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string weights;
  std::vector<double> pitches;
  std::string split = "val";
  std::string csv;
  bool oracle = false;
};

int cmd_eval(const Common& c, const EvalArgs& a) {
  const RunConfig cfg = load(c);
  const Context ctx(cfg);
  const auto& seeds = a.split == "train" ? cfg.train_scenes : cfg.val_scenes;
  if (seeds.empty()) throw ValidationError("no scenes in split " + a.split);
  nn::IcoSweepNet<float> net(ctx.net_config(int(ctx.rig().cameras.size())), cfg.seed);
  if (!a.oracle) nn::load_weights(a.weights.empty() ? cfg.resolve(cfg.weights) : a.weights, net.parameters());
  const std::vector<double> pitches = a.pitches.empty() ? cfg.pitches : a.pitches;
  std::ofstream csv;
  if (!a.csv.empty()) {
    csv.open(a.csv);
    if (!csv) throw ValidationError("cannot write " + a.csv);
  }
  std::ostream& out = a.csv.empty() ? std::cout : csv;
  out << metrics_csv_header() << "\n";
  for (double pitch : pitches) {
    if (pitch < 0 || pitch > 90) throw ValidationError("pitch must lie in [0, 90]");
    const CameraRig rig = ctx.rig(pitch);
    bool rebuilt = false;
    ctx.cache(rig, &rebuilt);
    if (rebuilt && !cache_dir_from_env().empty()) {
      std::cerr << "notice: sweep cache rebuilt for pitch " << pitch << "\n";
    }
    const Dataset ds = ctx.make_dataset(rig, seeds);
    Metrics m;
    if (a.oracle) {
      std::vector<double> gt;
      std::vector<std::uint8_t> mask;
      for (const Sample& s : ds.samples) {
        gt.insert(gt.end(), s.gt.indices.begin(), s.gt.indices.end());
        mask.insert(mask.end(), s.gt.mask.begin(), s.gt.mask.end());
      }
      m = metrics(gt, gt, mask, cfg.N);
    } else {
      m = evaluate(net, ctx, ds);
    }
    out << metrics_csv_row(pitch, a.oracle ? "oracle" : "icosweepnet", m) << "\n";
    out.flush();
  }
  return 0;
}

// --- export-erp -------------------------------------------------------------

struct ErpArgs {
  std::string input;
  int width = 512;
  int height = 256;
  std::optional<double> d_min;
  std::optional<int> N;
  std::string png;
  std::string pfm;
};

int cmd_export_erp(const Common& c, const ErpArgs& a) {
  const RunConfig cfg = load(c);
  const double d_min = a.d_min.value_or(cfg.d_min);
  const int N = a.N.value_or(cfg.N);
  if (!(d_min > 0) || N < 2 || a.width < 1 || a.height < 2) throw ValidationError("bad export parameters");
  const DepthIndexMap m = read_depth_index(a.input);
  const Icosphere ico = build_icosphere(m.level);
  const Image idx = render_erp(m.indices, ico, a.width, a.height);
  if (!a.png.empty()) write_png(a.png, colormap(idx, 1.0, double(N)));
  if (!a.pfm.empty()) {
    Image depth(a.width, a.height, 1);
    for (std::size_t i = 0; i < idx.data.size(); ++i) depth.data[i] = float(index_to_depth(idx.data[i], d_min, N));
    write_pfm(a.pfm, depth);
  }
  if (a.png.empty() && a.pfm.empty()) {
    std::cerr << "error: export-erp needs --png and/or --pfm\n";
    return kExitUsage;
  }
  std::cout << "width=" << a.width << "\nheight=" << a.height << "\n";
  return 0;
}

// --- render -----------------------------------------------------------------

struct RenderArgs {
  std::string scene;
  std::optional<std::uint64_t> scene_seed;
  double pitch = 0.0;
  std::string out = "render";
};

int cmd_render(const Common& c, const RenderArgs& a) {
  const RunConfig cfg = load(c);
  const Context ctx(cfg);
  const CameraRig rig = ctx.rig(a.pitch);
  const Scene scene = a.scene.empty() ? random_scene(a.scene_seed.value_or(cfg.seed), rig.center())
                                      : load_scene_file(a.scene);
  fs::create_directories(a.out);
  std::vector<Vec3> points = {rig.center()};
  for (const Camera& cam : rig.cameras) points.push_back(cam.extrinsics.t_wc());
  validate_scene(scene, points);
  for (const Camera& cam : rig.cameras) {
    const std::string path = (fs::path(a.out) / (cam.name + ".png")).string();
    write_png(path, render_fisheye(scene, cam.extrinsics, cam.intrinsics, cfg.supersample));
    std::cout << path << "\n";
  }
  save_rig((fs::path(a.out) / "rig.txt").string(), rig);
  std::ofstream((fs::path(a.out) / "scene.txt").string()) << format_scene(scene);
  const std::vector<double> depth = gt_depth_ico(scene, rig.center(), ctx.ico_out());
  write_depth_index((fs::path(a.out) / "gt_index.crwn").string(),
                    gt_index_map(depth, ctx.out_level(), cfg.d_min, cfg.N));
  std::cout << (fs::path(a.out) / "rig.txt").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"icosweep: omnidirectional depth from icospherical sweeping"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config, "Run configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", common.seed, "Seed overriding the configuration");
  app.add_flag("--serial", common.serial, "Single-threaded deterministic execution");

  ProjectArgs pa;
  auto* project = app.add_subcommand("project", "Project fisheye images onto the icosphere");
  project->add_option("--rig", pa.rig, "Rig file (default: built-in rig)");
  project->add_option("images", pa.images, "One PNG per camera, in rig order")->required();
  project->add_option("--level", pa.level, "Icosphere level (default: config level)");
  project->add_option("--out", pa.out, "Output directory");
  project->add_flag("--verify", pa.verify, "Check that constant inputs give constant outputs");

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep-cache", "Build or load the sweep interpolation cache");
  sweep->add_option("--rig", sa.rig, "Rig file (default: built-in rig)");
  sweep->add_option("--out", sa.out, "Also write the cache to this file");
  sweep->add_option("--pitch", sa.pitch, "Downward pitch of every camera, degrees");

  TrainArgs ta;
  auto* trn = app.add_subcommand("train", "Train on generated scenes");
  trn->add_option("--weights", ta.weights, "Output weights file (default: config weights)");
  trn->add_option("--log", ta.log, "Loss log (default: <weights>.log)");
  trn->add_option("--iterations", ta.iterations, "Override the iteration count");

  InferArgs ia;
  auto* inf = app.add_subcommand("infer", "Estimate a depth-index map");
  inf->add_option("--weights", ia.weights, "Weights file (default: config weights)");
  inf->add_option("--rig", ia.rig, "Rig file (default: built-in rig)");
  inf->add_option("--images", ia.images, "One PNG per camera, in rig order");
  inf->add_option("--scene", ia.scene, "Scene description to render");
  inf->add_option("--scene-seed", ia.scene_seed, "Seed of a generated scene to render");
  inf->add_option("--pitch", ia.pitch, "Downward pitch of every camera, degrees");
  inf->add_option("--out", ia.out, "Depth-index output file");

  EvalArgs ea;
  auto* evl = app.add_subcommand("eval", "Masked metrics per rig pitch");
  evl->add_option("--weights", ea.weights, "Weights file (default: config weights)");
  evl->add_option("--pitches", ea.pitches, "Pitch angles in degrees (default: config pitches)");
  evl->add_option("--split", ea.split, "Scene split")->check(CLI::IsMember({"train", "val"}));
  evl->add_option("--csv", ea.csv, "CSV output (default: stdout)");
  evl->add_flag("--oracle", ea.oracle, "Score the ground truth against itself");

  ErpArgs xa;
  auto* erp = app.add_subcommand("export-erp", "Equirectangular export of a depth-index map");
  erp->add_option("input", xa.input, "Depth-index file")->required();
  erp->add_option("--width", xa.width, "ERP width");
  erp->add_option("--height", xa.height, "ERP height");
  erp->add_option("--d-min", xa.d_min, "Nearest sphere radius (default: config)");
  erp->add_option("--N", xa.N, "Sphere count (default: config)");
  erp->add_option("--png", xa.png, "Inverse-depth colour PNG");
  erp->add_option("--pfm", xa.pfm, "Depth in meters, PFM");

  RenderArgs ra;
  auto* rnd = app.add_subcommand("render", "Render a synthetic scene with its rig and ground truth");
  rnd->add_option("--scene", ra.scene, "Scene description file");
  rnd->add_option("--scene-seed", ra.scene_seed, "Seed of a generated scene (default: --seed)");
  rnd->add_option("--pitch", ra.pitch, "Downward pitch of every camera, degrees");
  rnd->add_option("--out", ra.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (common.serial) kernels::set_num_threads(1);
  try {
    if (*project) return cmd_project(common, pa);
    if (*sweep) return cmd_sweep_cache(common, sa);
    if (*trn) return cmd_train(common, ta);
    if (*inf) return cmd_infer(common, ia);
    if (*evl) return cmd_eval(common, ea);
    if (*erp) return cmd_export_erp(common, xa);
    if (*rnd) return cmd_render(common, ra);
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ContractViolation& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
