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


// Serial reference kernels against the OpenMP kernels on crown-sized inputs.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "icosweep/archive.hpp"
#include "icosweep/icosphere.hpp"
#include "icosweep/kernels.hpp"
#include "icosweep/sweep.hpp"
#include "icosweep/scenegen.hpp"

namespace {

using icosweep::kernels::ConvDims;

// Five padded level-l rectangles, channel-last.
ConvDims crown_dims(int level, int depth, int cin, int cout, int stride) {
  ConvDims d;
  d.batch = 5;
  d.in_h = (std::size_t{1} << (level + 1)) + 3;
  d.in_w = (std::size_t{1} << level) + 3;
  d.kernel_depth = depth > 1 ? 3 : 1;
  d.in_d = depth > 1 ? std::size_t(depth) + 2 : 1;
  d.in_c = std::size_t(cin);
  d.out_c = std::size_t(cout);
  d.stride = stride;
  return d;
}

struct Buffers {
  std::vector<float> x, w, b, y, dy, dx, dw, db;
  explicit Buffers(const ConvDims& d) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<float> u(-1, 1);
    auto fill = [&](std::vector<float>& v, std::size_t n) {
      v.resize(n);
      for (auto& e : v) e = u(rng);
    };
    const std::size_t out = d.batch * d.out_h() * d.out_w() * d.out_d() * d.out_c;
    fill(x, d.batch * d.in_h * d.in_w * d.in_d * d.in_c);
    fill(w, d.out_c * d.in_c * d.taps());
    fill(b, d.out_c);
    fill(dy, out);
    y.assign(out, 0);
    dx.assign(x.size(), 0);
    dw.assign(w.size(), 0);
    db.assign(b.size(), 0);
  }
};

template <bool Reference>
void BM_ConvForward(benchmark::State& st) {
  const ConvDims d = crown_dims(int(st.range(0)), int(st.range(1)), int(st.range(2)), int(st.range(3)), 1);
  Buffers buf(d);
  for (auto _ : st) {
    if constexpr (Reference) {
      icosweep::kernels::reference::conv_forward(buf.x.data(), buf.w.data(), buf.b.data(), buf.y.data(), d);
    } else {
      icosweep::kernels::conv_forward(buf.x.data(), buf.w.data(), buf.b.data(), buf.y.data(), d);
    }
    benchmark::DoNotOptimize(buf.y.data());
  }
  st.counters["MAC/s"] = benchmark::Counter(
      double(d.batch * d.out_h() * d.out_w() * d.out_d() * d.out_c * d.in_c * d.taps()),
      benchmark::Counter::kIsIterationInvariantRate);
}

template <bool Reference>
void BM_ConvBackward(benchmark::State& st) {
  const ConvDims d = crown_dims(int(st.range(0)), int(st.range(1)), int(st.range(2)), int(st.range(3)), 1);
  Buffers buf(d);
  for (auto _ : st) {
    if constexpr (Reference) {
      icosweep::kernels::reference::conv_backward(buf.x.data(), buf.w.data(), buf.dy.data(), buf.dx.data(),
                                                  buf.dw.data(), buf.db.data(), d);
    } else {
      icosweep::kernels::conv_backward(buf.x.data(), buf.w.data(), buf.dy.data(), buf.dx.data(), buf.dw.data(),
                                       buf.db.data(), d);
    }
    benchmark::DoNotOptimize(buf.dw.data());
  }
}

// level, depth (1 = 2D), Cin, Cout
void conv_args(benchmark::internal::Benchmark* b) {
  b->Args({4, 1, 16, 16})->Args({3, 1, 16, 16})->Args({2, 8, 32, 16})->Args({2, 8, 16, 16});
}

BENCHMARK(BM_ConvForward<true>)->Name("conv_forward/reference")->Apply(conv_args);
BENCHMARK(BM_ConvForward<false>)->Name("conv_forward/openmp")->Apply(conv_args);
BENCHMARK(BM_ConvBackward<true>)->Name("conv_backward/reference")->Apply(conv_args);
BENCHMARK(BM_ConvBackward<false>)->Name("conv_backward/openmp")->Apply(conv_args);

struct SweepFixture {
  icosweep::Icosphere ico = icosweep::build_icosphere(2);
  icosweep::SweepPlan plan;
  std::vector<icosweep::Tensor<float>> feats;
  std::vector<const icosweep::Tensor<float>*> ptrs;
  SweepFixture() {
    const auto rig = icosweep::default_rig();
    const auto cache = icosweep::build_sweep_cache(rig, ico, icosweep::sphere_radii(8, 0.55));
    plan = icosweep::make_sweep_plan(cache, ico, std::vector<std::vector<std::uint8_t>>(4));
    std::mt19937 rng(3);
    std::uniform_real_distribution<float> u(-1, 1);
    for (int k = 0; k < 4; ++k) {
      icosweep::Tensor<float> t({ico.num_vertices(), 8});
      for (auto& v : t.values()) v = u(rng);
      feats.push_back(std::move(t));
    }
    for (const auto& f : feats) ptrs.push_back(&f);
  }
};

template <bool Reference>
void BM_CostVolume(benchmark::State& st) {
  static SweepFixture fx;
  for (auto _ : st) {
    auto v = Reference ? icosweep::reference::build_cost_volume(fx.ptrs, fx.plan)
                       : icosweep::build_cost_volume(fx.ptrs, fx.plan);
    benchmark::DoNotOptimize(v.data());
  }
}

BENCHMARK(BM_CostVolume<true>)->Name("cost_volume/reference");
BENCHMARK(BM_CostVolume<false>)->Name("cost_volume/openmp");

void BM_SweepCache(benchmark::State& st) {
  const auto ico = icosweep::build_icosphere(int(st.range(0)));
  const auto rig = icosweep::default_rig();
  const auto spheres = icosweep::sphere_radii(8, 0.55);
  for (auto _ : st) {
    auto c = icosweep::build_sweep_cache(rig, ico, spheres);
    benchmark::DoNotOptimize(c.entries.data());
  }
}
BENCHMARK(BM_SweepCache)->Arg(2)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
