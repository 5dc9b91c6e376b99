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

#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace icosweep::kernels {
namespace {

// [Cout, Cin, taps] -> [taps, Cin, Cout] so the innermost loop runs over Cout.
template <class T>
std::vector<T> pack_weights(const T* w, const ConvDims& d) {
  const std::size_t taps = d.taps();
  std::vector<T> p(taps * d.in_c * d.out_c);
  for (std::size_t co = 0; co < d.out_c; ++co) {
    for (std::size_t ci = 0; ci < d.in_c; ++ci) {
      for (std::size_t t = 0; t < taps; ++t) p[(t * d.in_c + ci) * d.out_c + co] = w[(co * d.in_c + ci) * taps + t];
    }
  }
  return p;
}

}  // namespace

template <class T>
void conv_forward(const T* x, const T* w, const T* bias, T* y, const ConvDims& d) {
  const std::size_t oh = d.out_h(), ow = d.out_w(), od = d.out_d();
  const std::size_t kd = std::size_t(d.kernel_depth);
  const std::size_t cin = d.in_c, cout = d.out_c;
  const std::vector<T> wp = pack_weights(w, d);
  const std::size_t s = std::size_t(d.stride);

#pragma omp parallel for collapse(2) schedule(static)
  for (std::ptrdiff_t b = 0; b < std::ptrdiff_t(d.batch); ++b) {
    for (std::ptrdiff_t oy = 0; oy < std::ptrdiff_t(oh); ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        for (std::size_t oz = 0; oz < od; ++oz) {
          T* out = y + (((std::size_t(b) * oh + oy) * ow + ox) * od + oz) * cout;
          for (std::size_t co = 0; co < cout; ++co) out[co] = bias ? bias[co] : T(0);
          for (std::size_t ky = 0; ky < 3; ++ky) {
            for (std::size_t kx = 0; kx < 3; ++kx) {
              for (std::size_t kz = 0; kz < kd; ++kz) {
                const std::size_t tap = (ky * 3 + kx) * kd + kz;
                const T* in = x + (((std::size_t(b) * d.in_h + oy * s + ky) * d.in_w + ox * s + kx) * d.in_d + oz + kz) * cin;
                const T* wt = wp.data() + tap * cin * cout;
                for (std::size_t ci = 0; ci < cin; ++ci) {
                  const T xv = in[ci];
                  const T* wr = wt + ci * cout;
#pragma omp simd
                  for (std::size_t co = 0; co < cout; ++co) out[co] += xv * wr[co];
                }
              }
            }
          }
        }
      }
    }
  }
}

template <class T>
void conv_backward(const T* x, const T* w, const T* dy, T* dx, T* dw, T* db, const ConvDims& d) {
  const std::size_t oh = d.out_h(), ow = d.out_w(), od = d.out_d();
  const std::size_t kd = std::size_t(d.kernel_depth);
  const std::size_t cin = d.in_c, cout = d.out_c;
  const std::size_t taps = d.taps();
  const std::size_t s = std::size_t(d.stride);
  const std::size_t nout = d.batch * oh * ow * od;

  for (std::size_t k = 0; k < nout; ++k) {
    const T* g = dy + k * cout;
    for (std::size_t co = 0; co < cout; ++co) db[co] += g[co];
  }

  // Weight gradient in packed layout, one tap per task.
  std::vector<T> dwp(taps * cin * cout, T(0));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t tap = 0; tap < std::ptrdiff_t(taps); ++tap) {
    const std::size_t ky = std::size_t(tap) / (3 * kd);
    const std::size_t kx = (std::size_t(tap) / kd) % 3;
    const std::size_t kz = std::size_t(tap) % kd;
    T* acc = dwp.data() + std::size_t(tap) * cin * cout;
    for (std::size_t b = 0; b < d.batch; ++b) {
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          for (std::size_t oz = 0; oz < od; ++oz) {
            const T* g = dy + (((b * oh + oy) * ow + ox) * od + oz) * cout;
            const T* in = x + (((b * d.in_h + oy * s + ky) * d.in_w + ox * s + kx) * d.in_d + oz + kz) * cin;
            for (std::size_t ci = 0; ci < cin; ++ci) {
              const T xv = in[ci];
              T* a = acc + ci * cout;
#pragma omp simd
              for (std::size_t co = 0; co < cout; ++co) a[co] += xv * g[co];
            }
          }
        }
      }
    }
  }
  for (std::size_t co = 0; co < cout; ++co) {
    for (std::size_t ci = 0; ci < cin; ++ci) {
      for (std::size_t t = 0; t < taps; ++t) dw[(co * cin + ci) * taps + t] += dwp[(t * cin + ci) * cout + co];
    }
  }

  if (!dx) return;
  const std::vector<T> wp = pack_weights(w, d);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < std::ptrdiff_t(d.batch); ++b) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        for (std::size_t oz = 0; oz < od; ++oz) {
          const T* g = dy + (((std::size_t(b) * oh + oy) * ow + ox) * od + oz) * cout;
          for (std::size_t ky = 0; ky < 3; ++ky) {
            for (std::size_t kx = 0; kx < 3; ++kx) {
              for (std::size_t kz = 0; kz < kd; ++kz) {
                const std::size_t tap = (ky * 3 + kx) * kd + kz;
                T* in = dx + (((std::size_t(b) * d.in_h + oy * s + ky) * d.in_w + ox * s + kx) * d.in_d + oz + kz) * cin;
                const T* wt = wp.data() + tap * cin * cout;
                for (std::size_t ci = 0; ci < cin; ++ci) {
                  const T* wr = wt + ci * cout;
                  T acc = T(0);
#pragma omp simd reduction(+ : acc)
                  for (std::size_t co = 0; co < cout; ++co) acc += wr[co] * g[co];
                  in[ci] += acc;
                }
              }
            }
          }
        }
      }
    }
  }
}

void set_num_threads(int n) {
#ifdef _OPENMP
  omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int num_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

template void conv_forward<float>(const float*, const float*, const float*, float*, const ConvDims&);
template void conv_forward<double>(const double*, const double*, const double*, double*, const ConvDims&);
template void conv_backward<float>(const float*, const float*, const float*, float*, float*, float*, const ConvDims&);
template void conv_backward<double>(const double*, const double*, const double*, double*, double*, double*,
                                    const ConvDims&);

}  // namespace icosweep::kernels
