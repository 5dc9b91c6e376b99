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

#include "icosweep/nnops.hpp"

#include <algorithm>
#include <cmath>

#include "icosweep/kernels.hpp"

namespace icosweep::nn {
namespace {

PadDims pad_dims(const Shape& s, int margin) {
  PadDims d;
  d.margin = margin;
  d.batch = s[0];
  d.height = s[1];
  d.width = s[2];
  if (s.size() == 5) {
    d.depth = s[3];
    d.feat = s[4];
    d.pad_depth = true;
  } else {
    d.feat = s[3];
  }
  return d;
}

template <class T>
void accumulate(Tensor<T>& dst, const Tensor<T>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

template <class T>
Var pad_replicate(Graph<T>& g, Var x, int margin) {
  const Shape& s = g.value(x).shape();
  require(s.size() == 4 || s.size() == 5, "pad_replicate: expected [B,H,W,C] or [B,H,W,D,C]");
  require(margin >= 1, "pad_replicate: margin must be >= 1");
  const PadDims d = pad_dims(s, margin);
  Shape out = s;
  out[1] = d.out_height();
  out[2] = d.out_width();
  if (s.size() == 5) out[3] = d.out_depth();
  Tensor<T> y(out);
  pad_replicate_forward(g.value(x).data(), y.data(), d);
  return g.record(std::move(y), g.requires_grad(x), [x, d](Graph<T>& gr, const Tensor<T>& gy) {
    pad_replicate_backward(gy.data(), gr.grad(x).data(), d);
  });
}

template <class T>
Var conv(Graph<T>& g, Var x, Var w, Var b, int stride) {
  const Shape& xs = g.value(x).shape();
  const Shape& ws = g.value(w).shape();
  const bool is3d = xs.size() == 5;
  require(xs.size() == 4 || is3d, "conv: input must be rank 4 or 5");
  require(ws.size() == xs.size() && ws[2] == 3 && ws[3] == 3 && (!is3d || ws[4] == 3), "conv: kernel must be 3x3(x3)");
  require(ws[1] == xs.back(), "conv: input channels do not match kernel");
  require(g.value(b).size() == ws[0], "conv: bias length must equal output channels");
  require(stride == 1 || stride == 2, "conv: stride must be 1 or 2");
  require(!(is3d && stride != 1), "conv: 3D conv supports stride 1 only");
  kernels::ConvDims d;
  d.batch = xs[0];
  d.in_h = xs[1];
  d.in_w = xs[2];
  d.in_d = is3d ? xs[3] : 1;
  d.in_c = xs.back();
  d.out_c = ws[0];
  d.kernel_depth = is3d ? 3 : 1;
  d.stride = stride;
  require(d.in_h >= 3 && d.in_w >= 3 && d.in_d >= std::size_t(d.kernel_depth), "conv: input smaller than kernel");
  Shape out = is3d ? Shape{d.batch, d.out_h(), d.out_w(), d.out_d(), d.out_c}
                   : Shape{d.batch, d.out_h(), d.out_w(), d.out_c};
  Tensor<T> y(out);
  kernels::conv_forward(g.value(x).data(), g.value(w).data(), g.value(b).data(), y.data(), d);
  const bool rg = g.requires_grad(x) || g.requires_grad(w) || g.requires_grad(b);
  return g.record(std::move(y), rg, [x, w, b, d](Graph<T>& gr, const Tensor<T>& gy) {
    Tensor<T> dw(gr.value(w).shape());
    Tensor<T> db(gr.value(b).shape());
    T* dx = gr.requires_grad(x) ? gr.grad(x).data() : nullptr;
    kernels::conv_backward(gr.value(x).data(), gr.value(w).data(), gy.data(), dx, dw.data(), db.data(), d);
    if (gr.requires_grad(w)) accumulate(gr.grad(w), dw);
    if (gr.requires_grad(b)) accumulate(gr.grad(b), db);
  });
}

namespace {

// Flat source index for each element of rot90(w).
std::vector<std::size_t> rot90_permutation(const Shape& s) {
  const std::size_t outer = s[0] * s[1];
  const std::size_t depth = s.size() == 5 ? s[4] : 1;
  std::vector<std::size_t> perm(shape_size(s));
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        for (std::size_t z = 0; z < depth; ++z) {
          const std::size_t dst = ((o * 3 + i) * 3 + j) * depth + z;
          const std::size_t src = ((o * 3 + j) * 3 + (2 - i)) * depth + z;
          perm[dst] = src;
        }
      }
    }
  }
  return perm;
}

}  // namespace

template <class T>
Tensor<T> rot90(const Tensor<T>& w) {
  const Shape& s = w.shape();
  require((s.size() == 4 || s.size() == 5) && s[2] == 3 && s[3] == 3, "rot90: expected a 3x3 kernel");
  const auto perm = rot90_permutation(s);
  Tensor<T> out(s);
  for (std::size_t k = 0; k < perm.size(); ++k) out[k] = w[perm[k]];
  return out;
}

template <class T>
Var rot90(Graph<T>& g, Var w) {
  Tensor<T> out = rot90(g.value(w));
  return g.record(std::move(out), g.requires_grad(w), [w](Graph<T>& gr, const Tensor<T>& gy) {
    const auto perm = rot90_permutation(gy.shape());
    Tensor<T>& dw = gr.grad(w);
    for (std::size_t k = 0; k < perm.size(); ++k) dw[perm[k]] += gy[k];
  });
}

template <class T>
Var relu(Graph<T>& g, Var x) {
  Tensor<T> y = g.value(x);
  for (auto& v : y.values()) v = std::max(v, T(0));
  return g.record(std::move(y), g.requires_grad(x), [x](Graph<T>& gr, const Tensor<T>& gy) {
    const Tensor<T>& xv = gr.value(x);
    Tensor<T>& dx = gr.grad(x);
    for (std::size_t i = 0; i < dx.size(); ++i) {
      if (xv[i] > T(0)) dx[i] += gy[i];
    }
  });
}

template <class T>
Var add(Graph<T>& g, Var a, Var b) {
  require(g.value(a).shape() == g.value(b).shape(), "add: shape mismatch");
  Tensor<T> y = g.value(a);
  const Tensor<T>& bv = g.value(b);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
  return g.record(std::move(y), g.requires_grad(a) || g.requires_grad(b), [a, b](Graph<T>& gr, const Tensor<T>& gy) {
    if (gr.requires_grad(a)) accumulate(gr.grad(a), gy);
    if (gr.requires_grad(b)) accumulate(gr.grad(b), gy);
  });
}

template <class T>
Var reshape(Graph<T>& g, Var x, Shape shape) {
  Tensor<T> y = g.value(x).reshaped(std::move(shape));
  return g.record(std::move(y), g.requires_grad(x), [x](Graph<T>& gr, const Tensor<T>& gy) {
    Tensor<T>& dx = gr.grad(x);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += gy[i];
  });
}

template <class T>
Var sum(Graph<T>& g, Var x) {
  T s = T(0);
  for (T v : g.value(x).values()) s += v;
  return g.record(Tensor<T>({1}, s), g.requires_grad(x), [x](Graph<T>& gr, const Tensor<T>& gy) {
    for (auto& v : gr.grad(x).values()) v += gy[0];
  });
}

template <class T>
Var dot(Graph<T>& g, Var x, const Tensor<T>& weights) {
  require(g.value(x).shape() == weights.shape(), "dot: shape mismatch");
  T s = T(0);
  const Tensor<T>& xv = g.value(x);
  for (std::size_t i = 0; i < xv.size(); ++i) s += xv[i] * weights[i];
  return g.record(Tensor<T>({1}, s), g.requires_grad(x), [x, weights](Graph<T>& gr, const Tensor<T>& gy) {
    Tensor<T>& dx = gr.grad(x);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += gy[0] * weights[i];
  });
}

template <class T>
CrownVar to_crown(Graph<T>& g, Var x, const CrownIndex& index) {
  VertexFeatures<T> f{index.level, g.value(x)};
  CrownGrids<T> c = to_crown(f, index);
  const std::size_t stride = row_stride(g.value(x).shape());
  const bool rg = g.requires_grad(x);
  // The chart is shared; capture the cell lists by pointer (index outlives the graph).
  const CrownIndex* ix = &index;
  CrownVar out;
  out.level = index.level;
  out.col = g.record(std::move(c.col), rg, [x, ix, stride](Graph<T>& gr, const Tensor<T>& gy) {
    scatter_add_rows(gy.data(), stride, ix->col_cells, gr.grad(x).data());
  });
  out.row = g.record(std::move(c.row), rg, [x, ix, stride](Graph<T>& gr, const Tensor<T>& gy) {
    scatter_add_rows(gy.data(), stride, ix->row_cells, gr.grad(x).data());
  });
  return out;
}

template <class T>
Var from_crown(Graph<T>& g, const CrownVar& c, const CrownIndex& index) {
  CrownGrids<T> grids{c.level, g.value(c.col), g.value(c.row)};
  VertexFeatures<T> f = from_crown(grids, index);
  const std::size_t stride = row_stride(f.data.shape());
  const CrownIndex* ix = &index;
  const Var col = c.col, row = c.row;
  const bool rg = g.requires_grad(col) || g.requires_grad(row);
  return g.record(std::move(f.data), rg, [col, row, ix, stride](Graph<T>& gr, const Tensor<T>& gy) {
    // Transpose of the mean: every duplicate cell receives grad / multiplicity.
    auto spread = [&](Var dst, std::span<const std::uint32_t> cells) {
      if (!gr.requires_grad(dst)) return;
      T* d = gr.grad(dst).data();
      for (std::size_t k = 0; k < cells.size(); ++k) {
        const std::uint32_t v = cells[k];
        const T inv = T(1) / T(ix->multiplicity[v]);
        const T* s = gy.data() + std::size_t(v) * stride;
        T* o = d + k * stride;
        for (std::size_t j = 0; j < stride; ++j) o[j] += s[j] * inv;
      }
    };
    spread(col, ix->col_cells);
    spread(row, ix->row_cells);
  });
}

template <class T>
CrownVar crown_conv(Graph<T>& g, const CrownVar& x, Var w, Var b, int stride) {
  const Var w_row = rot90(g, w);
  CrownVar out;
  out.level = stride == 2 ? x.level - 1 : x.level;
  out.col = conv(g, pad_replicate(g, x.col, 1), w, b, stride);
  out.row = conv(g, pad_replicate(g, x.row, 1), w_row, b, stride);
  return out;
}

template <class T>
CrownVar crown_relu(Graph<T>& g, const CrownVar& x) {
  return {x.level, relu(g, x.col), relu(g, x.row)};
}

template <class T>
CrownVar crown_add(Graph<T>& g, const CrownVar& a, const CrownVar& b) {
  require(a.level == b.level, "crown_add: level mismatch");
  return {a.level, add(g, a.col, b.col), add(g, a.row, b.row)};
}

template <class T>
Var soft_argmax(Graph<T>& g, Var scores) {
  const Tensor<T>& s = g.value(scores);
  require(s.rank() == 2, "soft_argmax: expected [V, N]");
  const std::size_t nv = s.dim(0), n = s.dim(1);
  Tensor<T> prob(s.shape());
  Tensor<T> out({nv});
  for (std::size_t i = 0; i < nv; ++i) {
    const T* row = s.data() + i * n;
    T* p = prob.data() + i * n;
    const T mx = *std::max_element(row, row + n);
    T z = T(0);
    for (std::size_t j = 0; j < n; ++j) z += (p[j] = std::exp(row[j] - mx));
    T e = T(0);
    for (std::size_t j = 0; j < n; ++j) {
      p[j] /= z;
      e += T(j + 1) * p[j];
    }
    out[i] = e;
  }
  return g.record(std::move(out), g.requires_grad(scores),
                  [scores, prob = std::move(prob), n](Graph<T>& gr, const Tensor<T>& gy) {
                    Tensor<T>& ds = gr.grad(scores);
                    const std::size_t nv = gy.size();
                    for (std::size_t i = 0; i < nv; ++i) {
                      const T* p = prob.data() + i * n;
                      T e = T(0);
                      for (std::size_t j = 0; j < n; ++j) e += T(j + 1) * p[j];
                      for (std::size_t j = 0; j < n; ++j) ds[i * n + j] += gy[i] * p[j] * (T(j + 1) - e);
                    }
                  });
}

template <class T>
Var huber_loss(Graph<T>& g, Var pred, const Tensor<T>& target, T delta) {
  const Tensor<T>& p = g.value(pred);
  require(p.size() == target.size() && p.size() > 0, "huber_loss: size mismatch");
  T total = T(0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const T e = std::abs(p[i] - target[i]);
    total += e <= delta ? T(0.5) * e * e : delta * (e - T(0.5) * delta);
  }
  const T inv = T(1) / T(p.size());
  return g.record(Tensor<T>({1}, total * inv), g.requires_grad(pred),
                  [pred, target, delta, inv](Graph<T>& gr, const Tensor<T>& gy) {
                    const Tensor<T>& pv = gr.value(pred);
                    Tensor<T>& dp = gr.grad(pred);
                    for (std::size_t i = 0; i < pv.size(); ++i) {
                      const T e = pv[i] - target[i];
                      const T de = std::abs(e) <= delta ? e : (e > 0 ? delta : -delta);
                      dp[i] += gy[0] * inv * de;
                    }
                  });
}

#define ICOSWEEP_INSTANTIATE(T)                                                     \
  template Var pad_replicate<T>(Graph<T>&, Var, int);                               \
  template Var conv<T>(Graph<T>&, Var, Var, Var, int);                              \
  template Var rot90<T>(Graph<T>&, Var);                                            \
  template Tensor<T> rot90<T>(const Tensor<T>&);                                    \
  template Var relu<T>(Graph<T>&, Var);                                             \
  template Var add<T>(Graph<T>&, Var, Var);                                         \
  template Var reshape<T>(Graph<T>&, Var, Shape);                                   \
  template Var sum<T>(Graph<T>&, Var);                                              \
  template Var dot<T>(Graph<T>&, Var, const Tensor<T>&);                            \
  template CrownVar to_crown<T>(Graph<T>&, Var, const CrownIndex&);                 \
  template Var from_crown<T>(Graph<T>&, const CrownVar&, const CrownIndex&);        \
  template CrownVar crown_conv<T>(Graph<T>&, const CrownVar&, Var, Var, int);       \
  template CrownVar crown_relu<T>(Graph<T>&, const CrownVar&);                      \
  template CrownVar crown_add<T>(Graph<T>&, const CrownVar&, const CrownVar&);      \
  template Var soft_argmax<T>(Graph<T>&, Var);                                      \
  template Var huber_loss<T>(Graph<T>&, Var, const Tensor<T>&, T);

ICOSWEEP_INSTANTIATE(float)
ICOSWEEP_INSTANTIATE(double)
#undef ICOSWEEP_INSTANTIATE

}  // namespace icosweep::nn
