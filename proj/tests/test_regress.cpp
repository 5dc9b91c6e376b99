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
#include <random>

#include "doctest.h"
#include "icosweep/error.hpp"
#include "icosweep/network.hpp"
#include "icosweep/regress.hpp"
#include "icosweep/scenegen.hpp"
#include "test_util.hpp"

using namespace icosweep;
using testutil::random_tensor;

namespace {

DepthIndexMap index_map(std::vector<double> v, int level = 0) {
  DepthIndexMap m;
  m.level = level;
  m.indices = std::move(v);
  return m;
}

/// Plain expectation of j under softmax, no max shift.
double direct_soft_argmax(const double* row, std::size_t n) {
  double z = 0, e = 0;
  for (std::size_t j = 0; j < n; ++j) {
    z += std::exp(row[j]);
    e += double(j + 1) * std::exp(row[j]);
  }
  return e / z;
}

Tensor<double> scores_for_level0(std::size_t n, double fill) { return Tensor<double>({vertex_count(0), n}, fill); }

}  // namespace

TEST_CASE("soft_argmax: one-hot and uniform rows") {
  Tensor<double> s = scores_for_level0(8, -20.0);
  for (std::size_t i = 0; i < 12; ++i) s[i * 8 + 4] = 20.0;
  const DepthIndexMap d = soft_argmax(s);
  CHECK(d.level == 0);
  REQUIRE(d.size() == 12);
  for (double x : d.indices) CHECK(std::abs(x - 5.0) < 1e-6);

  const DepthIndexMap u = soft_argmax(scores_for_level0(32, 0.7));
  for (double x : u.indices) CHECK(std::abs(x - 16.5) < 1e-12);
}

TEST_CASE("soft_argmax: direct formula, range and shift covariance") {
  std::mt19937_64 rng(3);
  const Tensor<double> s = random_tensor<double>({vertex_count(1), 16}, rng, -3, 3);
  const DepthIndexMap d = soft_argmax(s);
  CHECK(d.level == 1);
  Tensor<double> shifted = s;
  for (std::size_t i = 0; i < 42; ++i)
    for (std::size_t j = 0; j < 16; ++j) shifted[i * 16 + j] += double(i) * 0.37 - 5.0;
  const DepthIndexMap ds = soft_argmax(shifted);
  for (std::size_t i = 0; i < 42; ++i) {
    CHECK(d.indices[i] == doctest::Approx(direct_soft_argmax(s.data() + i * 16, 16)).epsilon(1e-12));
    CHECK(d.indices[i] > 1.0);
    CHECK(d.indices[i] < 16.0);
    CHECK(std::abs(ds.indices[i] - d.indices[i]) < 1e-9);
  }
  // extreme scores stay finite and strictly inside (1, N)
  Tensor<double> big = scores_for_level0(4, 0.0);
  big[0] = 700;
  big[7] = -700;
  const DepthIndexMap db = soft_argmax(big);
  for (double x : db.indices) {
    CHECK(std::isfinite(x));
    CHECK(x >= 1.0);
    CHECK(x <= 4.0);
  }
}

TEST_CASE("soft_argmax: raising score j pulls the index toward j") {
  std::mt19937_64 rng(6);
  const Tensor<double> s = random_tensor<double>({vertex_count(0), 10}, rng);
  const DepthIndexMap base = soft_argmax(s);
  for (std::size_t j = 0; j < 10; ++j) {
    Tensor<double> t = s;
    for (std::size_t i = 0; i < 12; ++i) t[i * 10 + j] += 1e-3;
    const DepthIndexMap moved = soft_argmax(t);
    for (std::size_t i = 0; i < 12; ++i) {
      const double delta = moved.indices[i] - base.indices[i];
      const double toward = double(j + 1) - base.indices[i];
      CHECK(delta * toward > 0);
    }
  }
}

TEST_CASE("soft_argmax: bad shapes") {
  CHECK_THROWS_AS(soft_argmax(Tensor<double>({13, 4})), ContractViolation);
  CHECK_THROWS_AS(soft_argmax(Tensor<double>({12})), ContractViolation);
}

TEST_CASE("gt_index and index_to_depth") {
  CHECK(gt_index(1.1, 0.55, 32) == doctest::Approx(16.5).epsilon(1e-15));
  CHECK(gt_index(0.55, 0.55, 32) == doctest::Approx(32.0).epsilon(1e-15));
  CHECK(std::abs(gt_index(1e12, 0.55, 32) - 1.0) < 1e-9);
  CHECK(index_to_depth(16.5, 0.55, 32) == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(index_to_depth(32.0, 0.55, 32) == doctest::Approx(0.55).epsilon(1e-15));
  CHECK(index_to_depth(1.0, 0.55, 32) == kBeyondFarPlane);
  CHECK(index_to_depth(0.3, 0.55, 32) == kBeyondFarPlane);
  CHECK_THROWS_AS(gt_index(0.0, 0.55, 32), ContractViolation);
  CHECK_THROWS_AS(gt_index(-1.0, 0.55, 32), ContractViolation);
  CHECK_THROWS_AS(gt_index(1.0, 0.55, 1), ContractViolation);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(1.0, 32.0);
  for (int n = 0; n < 1000; ++n) {
    double d = u(rng);
    if (d == 1.0) d = 2.0;
    CHECK(std::abs(gt_index(index_to_depth(d, 0.55, 32), 0.55, 32) - d) < 1e-9);
  }
}

TEST_CASE("gt_index_map") {
  std::vector<double> depths(vertex_count(1), 1.1);
  const DepthIndexMap m = gt_index_map(depths, 1, 0.55, 32);
  CHECK(m.level == 1);
  for (double x : m.indices) CHECK(x == doctest::Approx(16.5));
  CHECK_THROWS_AS(gt_index_map(depths, 2, 0.55, 32), ContractViolation);
}

TEST_CASE("huber loss: branches and mean") {
  CHECK(huber_loss(index_map({3.0}), index_map({3.0})) == 0.0);
  CHECK(huber_loss(index_map({2.5}), index_map({3.0})) == 0.125);
  CHECK(huber_loss(index_map({5.0}), index_map({3.0})) == 1.5);
  CHECK(huber_loss(index_map({1.0}), index_map({3.0})) == 1.5);
  CHECK(huber_loss(index_map({2.5, 5.0}), index_map({3.0, 3.0})) == doctest::Approx((0.125 + 1.5) / 2));
  // mask does not affect the loss
  DepthIndexMap gt = index_map({3.0, 3.0});
  gt.mask = {1, 0};
  CHECK(huber_loss(index_map({2.5, 5.0}), gt) == doctest::Approx((0.125 + 1.5) / 2));
  CHECK_THROWS_AS(huber_loss(index_map({1.0}, 0), index_map({1.0}, 1)), ContractViolation);
  CHECK_THROWS_AS(huber_loss(index_map({1.0, 2.0}), index_map({1.0})), ContractViolation);
}

TEST_CASE("metrics: unit error and zero error") {
  std::vector<double> gt(42), pred(42);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(2, 30);
  for (std::size_t i = 0; i < 42; ++i) {
    gt[i] = u(rng);
    pred[i] = gt[i] + ((i % 2) ? 1.0 : -1.0);
  }
  const Metrics m = metrics(pred, gt, {}, 32);
  CHECK(m.count == 42);
  CHECK(m.mae == doctest::Approx(3.125).epsilon(1e-12));
  CHECK(m.rms == doctest::Approx(3.125).epsilon(1e-12));
  CHECK(m.gt1 == 100.0);
  CHECK(m.gt3 == 100.0);
  CHECK(m.gt5 == 0.0);
  const Metrics z = metrics(gt, gt, {}, 32);
  CHECK(z.mae == 0.0);
  CHECK(z.rms == 0.0);
  CHECK(z.gt1 == 0.0);
}

TEST_CASE("metrics: direct scan over masked vertices") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(1, 16);
  std::vector<double> gt(162), pred(162);
  std::vector<std::uint8_t> mask(162);
  for (std::size_t i = 0; i < 162; ++i) {
    gt[i] = u(rng);
    pred[i] = u(rng);
    mask[i] = (rng() % 3) != 0;
  }
  double sum = 0, sq = 0, n = 0, c1 = 0, c3 = 0, c5 = 0;
  for (std::size_t i = 0; i < 162; ++i) {
    if (!mask[i]) continue;
    const double e = 100 * std::abs(pred[i] - gt[i]) / 16;
    sum += e;
    sq += e * e;
    n += 1;
    c1 += e > 1;
    c3 += e > 3;
    c5 += e > 5;
  }
  const Metrics m = metrics(pred, gt, mask, 16);
  CHECK(double(m.count) == n);
  CHECK(m.mae == doctest::Approx(sum / n).epsilon(1e-12));
  CHECK(m.rms == doctest::Approx(std::sqrt(sq / n)).epsilon(1e-12));
  CHECK(m.gt1 == doctest::Approx(100 * c1 / n));
  CHECK(m.gt3 == doctest::Approx(100 * c3 / n));
  CHECK(m.gt5 == doctest::Approx(100 * c5 / n));

  DepthIndexMap p = index_map(pred, 2), g = index_map(gt, 2);
  g.mask = mask;
  CHECK(metrics(p, g, 16).mae == m.mae);
  CHECK_THROWS_AS(metrics(index_map(pred, 3), g, 16), ContractViolation);
}

TEST_CASE("metrics: errors") {
  const std::vector<double> a(4, 1.0);
  CHECK_THROWS_AS(metrics(a, a, std::vector<std::uint8_t>(4, 0), 8), ContractViolation);
  CHECK_THROWS_AS(metrics(a, std::vector<double>(3, 1.0), {}, 8), ContractViolation);
  CHECK_THROWS_AS(metrics(a, a, std::vector<std::uint8_t>(3, 1), 8), ContractViolation);
  CHECK_THROWS_AS(metrics(a, a, {}, 1), ContractViolation);
}

TEST_CASE("metrics: text and CSV formatting") {
  Metrics m;
  m.mae = 3.125;
  m.rms = 4.0;
  m.gt1 = 100;
  m.gt3 = 50;
  m.gt5 = 0;
  m.count = 7;
  CHECK(metrics_csv_header() == "angle,model,gt1,gt3,gt5,mae,rms");
  CHECK(metrics_csv_row(45, "net", m) == "45,net,100.0000,50.0000,0.0000,3.125000,4.000000");
  const std::string t = format_metrics(m);
  CHECK(t.find("mae=3.125000") != std::string::npos);
  CHECK(t.find("count=7") != std::string::npos);
}

TEST_CASE("level_for_vertex_count") {
  for (int l = 0; l <= 6; ++l) CHECK(level_for_vertex_count(vertex_count(l)) == l);
  CHECK_THROWS_AS(level_for_vertex_count(13), ContractViolation);
}

TEST_CASE("evaluation mask counts usable cameras at the ground-truth sphere") {
  const Icosphere ico = build_icosphere(2);
  const CameraRig rig = default_rig(220, 64, 0.2);
  std::vector<std::vector<std::uint8_t>> masks(4);
  masks[0].assign(ico.num_vertices(), 0);
  masks[1].assign(ico.num_vertices(), 0);
  for (std::size_t v = 0; v < ico.num_vertices(); ++v) masks[1][v] = ico.vertices[v].z() > 0;
  const SweepPlan p = make_sweep_plan(build_sweep_cache(rig, ico, sphere_radii(4, 0.5)), ico, masks);
  std::vector<double> gt(ico.num_vertices(), 2.6);
  const auto m2 = evaluation_mask(p, gt, 2);
  const auto m3 = evaluation_mask(p, gt, 3);
  for (std::size_t i = 0; i < ico.num_vertices(); ++i) {
    CHECK(m2[i] == (p.coverage(i, 2) >= 2));
    CHECK(m3[i] == (p.coverage(i, 2) >= 3));
    CHECK(m2[i] == 1);
  }
  std::size_t upper = 0;
  for (auto x : m3) upper += x;
  CHECK(upper > 0);
  CHECK(upper < ico.num_vertices());
  // out-of-range indices clamp to the end spheres
  std::vector<double> far(ico.num_vertices(), -3.0), near(ico.num_vertices(), 40.0);
  for (std::size_t i = 0; i < ico.num_vertices(); ++i) {
    CHECK(evaluation_mask(p, far, 3)[i] == (p.coverage(i, 0) >= 3));
    CHECK(evaluation_mask(p, near, 3)[i] == (p.coverage(i, 3) >= 3));
  }
  CHECK_THROWS_AS(evaluation_mask(p, std::vector<double>(5, 1.0)), ContractViolation);
}

TEST_CASE("regularizer: identity layer, constants and gradient") {
  const Icosphere ico = build_icosphere(4);
  const nn::CrownCharts charts = nn::make_crown_charts(ico);
  const CrownIndex& index = charts.at(2);
  const std::size_t nv = vertex_count(2), nsph = 6;

  SUBCASE("identity kernel returns the volume") {
    std::mt19937_64 rng(1);
    nn::Regularizer<double> reg({1, 1}, rng);
    auto& layer = reg.layers().front();
    layer.weight.value.fill(0.0);
    layer.weight.value[13] = 1.0;  // centre tap of a 3x3x3 kernel
    const Tensor<double> vol = random_tensor<double>({nv, nsph, 1}, rng);
    nn::Graph<double> g;
    const nn::Var out = reg.forward(g, g.constant(vol), index);
    REQUIRE(g.value(out).shape() == Shape{nv, nsph});
    for (std::size_t n = 0; n < vol.size(); ++n) CHECK(std::abs(g.value(out)[n] - vol[n]) < 1e-12);
  }

  SUBCASE("constant volume gives a constant score") {
    std::mt19937_64 rng(2);
    nn::Regularizer<double> reg({3, 4, 1}, rng);
    for (auto* p : reg.parameters())
      if (p->value.rank() == 1) p->value = random_tensor<double>(p->value.shape(), rng, -0.3, 0.3);
    nn::Graph<double> g;
    const nn::Var out = reg.forward(g, g.constant(Tensor<double>({nv, nsph, 3}, 0.4)), index);
    const Tensor<double>& s = g.value(out);
    for (std::size_t n = 1; n < s.size(); ++n) CHECK(std::abs(s[n] - s[0]) < 1e-12);
  }

  SUBCASE("huber(soft_argmax(regularize)) gradient") {
    std::mt19937_64 rng(3);
    nn::Regularizer<double> reg({2, 3, 1}, rng);
    for (auto* p : reg.parameters())
      if (p->value.rank() == 1) p->value = random_tensor<double>(p->value.shape(), rng, -0.3, 0.3);
    const Tensor<double> vol = random_tensor<double>({nv, nsph, 2}, rng);
    const Tensor<double> target = random_tensor<double>({nv}, rng, 1.0, 6.0);
    auto loss = [&](nn::Graph<double>& g) {
      const nn::Var s = reg.forward(g, g.constant(vol), index);
      return nn::huber_loss(g, nn::soft_argmax(g, s), target, 1.0);
    };
    {
      nn::Graph<double> g;
      g.backward(loss(g));
    }
    auto eval = [&] {
      nn::Graph<double> g;
      return g.value(loss(g))[0];
    };
    std::mt19937_64 drng(4);
    for (auto* p : reg.parameters()) {
      CAPTURE(p->name);
      CHECK(testutil::directional_check(eval, p->value, p->grad, drng) < 1e-4);
    }
  }

  SUBCASE("argument checks") {
    std::mt19937_64 rng(4);
    nn::Regularizer<double> reg({2, 1}, rng);
    nn::Graph<double> g;
    CHECK_THROWS_AS(reg.forward(g, g.constant(Tensor<double>({nv, nsph, 3})), index), ContractViolation);
    CHECK_THROWS_AS(reg.forward(g, g.constant(Tensor<double>({nv + 1, nsph, 2})), index), ContractViolation);
    CHECK_THROWS_AS(nn::Regularizer<double>({2}, rng), ContractViolation);
    nn::Regularizer<double> wide({2, 3}, rng);
    CHECK_THROWS_AS(wide.forward(g, g.constant(Tensor<double>({nv, nsph, 2})), index), ContractViolation);
  }
}
