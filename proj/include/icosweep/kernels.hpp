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

#include <cstddef>

namespace icosweep::kernels {

/// Valid (unpadded) cross-correlation with a 3x3 spatial kernel and a depth
/// extent of 1 (2D) or 3 (3D). Activations are [B, H, W, D, C] channel-last;
/// weights are [Cout, Cin, 3, 3] or [Cout, Cin, 3, 3, 3]. Stride applies to
/// the two spatial axes only.
struct ConvDims {
  std::size_t batch = 1;
  std::size_t in_h = 3, in_w = 3, in_d = 1;
  std::size_t in_c = 1, out_c = 1;
  int kernel_depth = 1;
  int stride = 1;

  std::size_t out_h() const { return (in_h - 3) / stride + 1; }
  std::size_t out_w() const { return (in_w - 3) / stride + 1; }
  std::size_t out_d() const { return in_d - kernel_depth + 1; }
  std::size_t taps() const { return 9 * std::size_t(kernel_depth); }
};

/// OpenMP kernels. Forward parallelises over output rows; backward over
/// batches (input gradient) and kernel taps (weight gradient), so every
/// accumulation has a single writer.
template <class T>
void conv_forward(const T* x, const T* w, const T* bias, T* y, const ConvDims& d);
/// Accumulates into dx (may be null), dw and db.
template <class T>
void conv_backward(const T* x, const T* w, const T* dy, T* dx, T* dw, T* db, const ConvDims& d);

namespace reference {

/// Straight-loop serial versions kept as the test oracle for the kernels above.
template <class T>
void conv_forward(const T* x, const T* w, const T* bias, T* y, const ConvDims& d);
template <class T>
void conv_backward(const T* x, const T* w, const T* dy, T* dx, T* dw, T* db, const ConvDims& d);

}  // namespace reference

/// Sets the OpenMP thread count (1 forces the deterministic serial path).
void set_num_threads(int n);
int num_threads();

}  // namespace icosweep::kernels
