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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "icosweep/error.hpp"
#include "icosweep/kernels.hpp"
#include "icosweep/pipeline.hpp"
#include "test_util.hpp"

using namespace icosweep;

namespace {

RunConfig tiny_run() {
  RunConfig c;
  c.level = 3;
  c.N = 4;
  c.c_feat = 4;
  c.image_size = 32;
  c.supersample = 1;
  c.train_scenes = {101};
  c.val_scenes = {201};
  c.iterations = 3;
  c.val_every = 2;
  return c;
}

double slab_exit(const Vec3& lo, const Vec3& hi, const Vec3& d) {
  double t = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (d[a] > 0) t = std::min(t, hi[a] / d[a]);
    if (d[a] < 0) t = std::min(t, lo[a] / d[a]);
  }
  return t;
}

}  // namespace

TEST_CASE("image_tensor centres valid colours and zeroes the rest") {
  IcoImage img;
  img.level = 0;
  img.channels = 3;
  img.values.assign(36, 0.75f);
  img.valid.assign(12, 1);
  img.valid[4] = 0;
  img.values[4 * 3 + 1] = 0.9f;
  const Tensor<float> t = image_tensor(img);
  REQUIRE(t.shape() == Shape{12, 3});
  for (std::size_t v = 0; v < 12; ++v)
    for (int c = 0; c < 3; ++c) CHECK(t[v * 3 + c] == (v == 4 ? 0.0f : 0.25f));
}

TEST_CASE("jitter_colors touches valid entries only") {
  IcoImage img;
  img.channels = 3;
  img.values.assign(36, 0.75f);
  img.valid.assign(12, 1);
  img.valid[2] = 0;
  Tensor<float> t = image_tensor(img);
  jitter_colors(t, img, 2.0f, 0.1f);
  for (std::size_t v = 0; v < 12; ++v)
    for (int c = 0; c < 3; ++c) CHECK(t[v * 3 + c] == doctest::Approx(v == 2 ? 0.0 : 0.6));
  Tensor<float> wrong({5, 3});
  CHECK_THROWS_AS(jitter_colors(wrong, img, 1.0f, 0.0f), ContractViolation);
}

TEST_CASE("ERP directions and rendering") {
  CHECK(erp_direction(3, 0, 8, 5).isApprox(Vec3(0, 0, 1), 1e-12));
  CHECK(erp_direction(5, 4, 8, 5).isApprox(Vec3(0, 0, -1), 1e-12));
  CHECK(erp_direction(0, 2, 8, 5).isApprox(Vec3(-1, 0, 0), 1e-12));
  CHECK(erp_direction(4, 2, 8, 5).isApprox(Vec3(1, 0, 0), 1e-12));
  CHECK(erp_direction(6, 2, 8, 5).isApprox(Vec3(0, 1, 0), 1e-12));
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 16; ++x) CHECK(erp_direction(x, y, 16, 9).norm() == doctest::Approx(1.0));

  const Icosphere ico = build_icosphere(3);
  const Image c = render_erp(std::vector<double>(ico.num_vertices(), 2.5), ico, 32, 16);
  REQUIRE(c.channels == 1);
  for (float v : c.data) CHECK(v == doctest::Approx(2.5).epsilon(1e-6));

  // planar barycentric weights reproduce linear fields of the face-plane point
  std::vector<double> z(ico.num_vertices());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = ico.vertices[i].z();
  const Image e = render_erp(z, ico, 64, 32);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 64; ++x) CHECK(std::abs(e.at(x, y, 0) - erp_direction(x, y, 64, 32).z()) < 0.02);

  CHECK_THROWS_AS(render_erp(std::vector<double>(5), ico, 8, 4), ContractViolation);
  CHECK_THROWS_AS(render_erp(z, ico, 8, 1), ContractViolation);
}

TEST_CASE("ERP of an empty-room ground truth follows the slab distance") {
  const Icosphere ico = build_icosphere(5);
  Scene s;
  s.room_min = Vec3(-2, -1.5, -1);
  s.room_max = Vec3(2.5, 1.5, 1.2);
  const std::vector<double> d = gt_depth_ico(s, Vec3::Zero(), ico);
  const Image erp = render_erp(d, ico, 96, 48);
  double rel = 0;
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 96; ++x) {
      const double t = slab_exit(s.room_min, s.room_max, erp_direction(x, y, 96, 48));
      rel += std::abs(erp.at(x, y, 0) - t) / t;
    }
  CHECK(rel / (96 * 48) < 0.01);
}

TEST_CASE("colormap endpoints and midpoint") {
  Image g(3, 1, 1);
  g.at(0, 0, 0) = 1.0f;
  g.at(1, 0, 0) = 2.0f;
  g.at(2, 0, 0) = 3.0f;
  const Image c = colormap(g, 1.0, 3.0);
  REQUIRE(c.channels == 3);
  CHECK(c.at(0, 0, 0) == 0.0f);
  CHECK(c.at(0, 0, 2) == 0.5f);
  CHECK(c.at(1, 0, 0) == 0.5f);
  CHECK(c.at(1, 0, 1) == 1.0f);
  CHECK(c.at(1, 0, 2) == 0.5f);
  CHECK(c.at(2, 0, 0) == 0.5f);
  CHECK(c.at(2, 0, 2) == 0.0f);
  CHECK_THROWS_AS(colormap(Image(2, 2, 3), 0, 1), ContractViolation);
}

TEST_CASE("ico image and depth index files round trip") {
  const auto dir = testutil::temp_dir("pipeline");
  IcoImage img;
  img.level = 1;
  img.channels = 3;
  for (std::size_t i = 0; i < 42 * 3; ++i) img.values.push_back(float(i) / 7.0f);
  for (std::size_t i = 0; i < 42; ++i) img.valid.push_back(i % 3 != 0);
  write_ico_image((dir / "a.crwn").string(), img);
  const IcoImage r = read_ico_image((dir / "a.crwn").string());
  CHECK(r.level == 1);
  CHECK(r.channels == 3);
  CHECK(r.values == img.values);
  CHECK(r.valid == img.valid);

  DepthIndexMap m;
  m.level = 2;
  for (std::size_t i = 0; i < 162; ++i) m.indices.push_back(1.0 + double(i) / 17.0);
  write_depth_index((dir / "d.crwn").string(), m);
  DepthIndexMap rm = read_depth_index((dir / "d.crwn").string());
  CHECK(rm.level == 2);
  CHECK(rm.indices == m.indices);
  CHECK(rm.mask.empty());
  m.mask.assign(162, 1);
  m.mask[3] = 0;
  write_depth_index((dir / "d.crwn").string(), m);
  rm = read_depth_index((dir / "d.crwn").string());
  CHECK(rm.mask == m.mask);

  CHECK_THROWS(read_depth_index((dir / "a.crwn").string()));
  CHECK_THROWS(read_ico_image((dir / "d.crwn").string()));
  std::ofstream((dir / "junk.crwn").string()) << "not an archive";
  CHECK_THROWS(read_ico_image((dir / "junk.crwn").string()));
  std::filesystem::remove_all(dir);
}

TEST_CASE("context: geometry, rigs and samples") {
  const Context ctx(tiny_run());
  CHECK(ctx.ico().level == 3);
  CHECK(ctx.ico_out().level == 1);
  CHECK(ctx.out_level() == 1);
  CHECK(ctx.charts().level == 3);
  CHECK(ctx.spheres().count == 4);
  const CameraRig r0 = ctx.rig(0), r45 = ctx.rig(45);
  REQUIRE(r0.cameras.size() == 4);
  CHECK(r0.cameras[0].intrinsics.width == 32);
  CHECK(r45.cameras[0].extrinsics.R_wc().col(2).z() == doctest::Approx(-std::sqrt(0.5)));

  const Scene scene = random_scene(101, r0.center());
  Timing t;
  const Sample s = ctx.make_sample(scene, r0, &t);
  CHECK(s.name == "scene101");
  REQUIRE(s.images.size() == 4);
  for (const IcoImage& im : s.images) {
    CHECK(im.level == 3);
    CHECK(im.num_vertices() == vertex_count(3));
  }
  CHECK(s.gt_depth == gt_depth_ico(scene, r0.center(), ctx.ico_out()));
  REQUIRE(s.gt.size() == vertex_count(1));
  for (std::size_t i = 0; i < s.gt.size(); ++i)
    CHECK(s.gt.indices[i] == doctest::Approx(gt_index(s.gt_depth[i], 0.55, 4)));
  CHECK(t.render > 0);
  CHECK(t.report().find("render") != std::string::npos);

  Scene blocked = scene;
  blocked.spheres.push_back({r0.cameras[0].extrinsics.t_wc(), 0.05});
  CHECK_THROWS_AS(ctx.make_sample(blocked, r0), ValidationError);

  const Dataset ds = ctx.make_dataset(r0, {101, 102});
  REQUIRE(ds.samples.size() == 2);
  CHECK(ds.plan.level == 1);
  CHECK(ds.plan.num_cameras == 4);
  for (const Sample& x : ds.samples) CHECK(x.gt.mask == evaluation_mask(ds.plan, x.gt.indices));

  RunConfig bad = tiny_run();
  bad.level = 2;
  CHECK_THROWS(Context{bad});
}

TEST_CASE("predict, evaluate and a short training run") {
  const int saved_threads = kernels::num_threads();
  kernels::set_num_threads(1);
  const Context ctx(tiny_run());
  const Dataset train_set = ctx.make_dataset(ctx.rig(0), {101});
  const Dataset val_set = ctx.make_dataset(ctx.rig(0), {201});

  nn::IcoSweepNet<float> net(ctx.net_config(4), 7);
  const std::vector<double> p = predict(net, ctx, train_set.plan, train_set.samples[0]);
  REQUIRE(p.size() == vertex_count(1));
  for (double x : p) {
    CHECK(x > 1.0);
    CHECK(x < 4.0);
  }
  const Metrics m0 = evaluate(net, ctx, train_set);
  CHECK(m0.count > 0);
  CHECK(std::isfinite(m0.mae));

  std::ostringstream log;
  const TrainResult r = train(net, ctx, train_set, &val_set, &log);
  CHECK(r.losses.size() == 3);
  for (double l : r.losses) CHECK(std::isfinite(l));
  CHECK(r.has_val);
  REQUIRE(r.val_losses.size() == 3);  // iterations 0, 2 and 3
  CHECK(r.val_losses[0].first == 0);
  CHECK(r.val_losses[1].first == 2);
  CHECK(r.val_losses[2].first == 3);
  double best = 1e300;
  int best_it = -1;
  for (const auto& [it, l] : r.val_losses)
    if (l < best) {
      best = l;
      best_it = it;
    }
  CHECK(r.best_iteration == best_it);
  CHECK(r.initial_train.mae == m0.mae);
  CHECK(r.selected_val.mae == evaluate(net, ctx, val_set).mae);
  CHECK(validation_loss(net, ctx, val_set) == doctest::Approx(best).epsilon(1e-9));
  CHECK(log.str().find("iter 2 loss") != std::string::npos);

  SUBCASE("repeat runs are identical") {
    nn::IcoSweepNet<float> a(ctx.net_config(4), 7), b(ctx.net_config(4), 7);
    const TrainResult ra = train(a, ctx, train_set, nullptr);
    const TrainResult rb = train(b, ctx, train_set, nullptr);
    CHECK(ra.losses == rb.losses);
    CHECK(ra.best_iteration == 3);
    CHECK(ra.selected_train.mae == ra.final_train.mae);
  }
  SUBCASE("colour jitter is seeded and changes the trajectory") {
    RunConfig c = tiny_run();
    c.color_jitter = 0.2;
    const Context ctxj(c);
    nn::IcoSweepNet<float> a(ctxj.net_config(4), 7), b(ctxj.net_config(4), 7), plain(ctx.net_config(4), 7);
    const TrainResult ra = train(a, ctxj, train_set, nullptr);
    const TrainResult rb = train(b, ctxj, train_set, nullptr);
    const TrainResult rp = train(plain, ctx, train_set, nullptr);
    CHECK(ra.losses == rb.losses);
    CHECK(ra.losses[0] != rp.losses[0]);
    for (double l : ra.losses) CHECK(std::isfinite(l));
  }
  SUBCASE("zero iterations leave the weights untouched") {
    RunConfig c = tiny_run();
    c.iterations = 0;
    const Context ctx0(c);
    nn::IcoSweepNet<float> a(ctx0.net_config(4), 3), b(ctx0.net_config(4), 3);
    const TrainResult r0 = train(a, ctx0, train_set, &val_set);
    CHECK(r0.losses.empty());
    CHECK(r0.best_iteration == 0);
    const auto pa = a.parameters(), pb = b.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value.storage() == pb[i]->value.storage());
  }
  kernels::set_num_threads(saved_threads);
}
