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

#include "icosweep/kernels.hpp"

namespace icosweep::kernels::reference {
namespace {

struct Indexer {
  const ConvDims& d;
  std::size_t in(std::size_t b, std::size_t y, std::size_t x, std::size_t z, std::size_t c) const {
    return (((b * d.in_h + y) * d.in_w + x) * d.in_d + z) * d.in_c + c;
  }
  std::size_t out(std::size_t b, std::size_t y, std::size_t x, std::size_t z, std::size_t c) const {
    return (((b * d.out_h() + y) * d.out_w() + x) * d.out_d() + z) * d.out_c + c;
  }
  std::size_t weight(std::size_t co, std::size_t ci, std::size_t ky, std::size_t kx, std::size_t kz) const {
    return (((co * d.in_c + ci) * 3 + ky) * 3 + kx) * d.kernel_depth + kz;
  }
};

}  // namespace

template <class T>
void conv_forward(const T* x, const T* w, const T* bias, T* y, const ConvDims& d) {
  const Indexer ix{d};
  const std::size_t s = d.stride;
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t oy = 0; oy < d.out_h(); ++oy)
      for (std::size_t ox = 0; ox < d.out_w(); ++ox)
        for (std::size_t oz = 0; oz < d.out_d(); ++oz)
          for (std::size_t co = 0; co < d.out_c; ++co) {
            T acc = bias ? bias[co] : T(0);
            for (std::size_t ci = 0; ci < d.in_c; ++ci)
              for (std::size_t ky = 0; ky < 3; ++ky)
                for (std::size_t kx = 0; kx < 3; ++kx)
                  for (std::size_t kz = 0; kz < std::size_t(d.kernel_depth); ++kz)
                    acc += w[ix.weight(co, ci, ky, kx, kz)] * x[ix.in(b, oy * s + ky, ox * s + kx, oz + kz, ci)];
            y[ix.out(b, oy, ox, oz, co)] = acc;
          }
}

template <class T>
void conv_backward(const T* x, const T* w, const T* dy, T* dx, T* dw, T* db, const ConvDims& d) {
  const Indexer ix{d};
  const std::size_t s = d.stride;
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t oy = 0; oy < d.out_h(); ++oy)
      for (std::size_t ox = 0; ox < d.out_w(); ++ox)
        for (std::size_t oz = 0; oz < d.out_d(); ++oz)
          for (std::size_t co = 0; co < d.out_c; ++co) {
            const T g = dy[ix.out(b, oy, ox, oz, co)];
            db[co] += g;
            for (std::size_t ci = 0; ci < d.in_c; ++ci)
              for (std::size_t ky = 0; ky < 3; ++ky)
                for (std::size_t kx = 0; kx < 3; ++kx)
                  for (std::size_t kz = 0; kz < std::size_t(d.kernel_depth); ++kz) {
                    const std::size_t xi = ix.in(b, oy * s + ky, ox * s + kx, oz + kz, ci);
                    const std::size_t wi = ix.weight(co, ci, ky, kx, kz);
                    dw[wi] += g * x[xi];
                    if (dx) dx[xi] += g * w[wi];
                  }
          }
}

template void conv_forward<float>(const float*, const float*, const float*, float*, const ConvDims&);
template void conv_forward<double>(const double*, const double*, const double*, double*, const ConvDims&);
template void conv_backward<float>(const float*, const float*, const float*, float*, float*, float*, const ConvDims&);
template void conv_backward<double>(const double*, const double*, const double*, double*, double*, double*,
                                    const ConvDims&);

}  // namespace icosweep::kernels::reference
