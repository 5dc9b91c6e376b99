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

#include <span>

#include "icosweep/autograd.hpp"
#include "icosweep/crown.hpp"

namespace icosweep::nn {

// Differentiable primitives. Activations are channel-last; every op checks
// its input shapes and throws ContractViolation on mismatch.

/// Replicate padding of [B, H, W, C] (2D) or [B, H, W, D, C] (3D, all three
/// spatial axes padded).
template <class T>
Var pad_replicate(Graph<T>& g, Var x, int margin);

/// Valid 3x3 (or 3x3x3) cross-correlation of a pre-padded input.
/// w is [Cout, Cin, 3, 3] for rank-4 x and [Cout, Cin, 3, 3, 3] for rank-5 x.
template <class T>
Var conv(Graph<T>& g, Var x, Var w, Var b, int stride);

/// Kernel rotated by 90 degrees in its two spatial axes:
/// out[.., i, j, ..] = w[.., j, 2 - i, ..]. The depth axis is untouched.
template <class T>
Var rot90(Graph<T>& g, Var w);
template <class T>
Tensor<T> rot90(const Tensor<T>& w);

template <class T>
Var relu(Graph<T>& g, Var x);
template <class T>
Var add(Graph<T>& g, Var a, Var b);
/// Same values under a new shape of equal size.
template <class T>
Var reshape(Graph<T>& g, Var x, Shape shape);
/// Scalar sum of all elements.
template <class T>
Var sum(Graph<T>& g, Var x);
/// Scalar <x, weights> for a constant tensor of the same shape.
template <class T>
Var dot(Graph<T>& g, Var x, const Tensor<T>& weights);

/// Crown-layout activations held in the graph.
struct CrownVar {
  int level = 0;
  Var col;  // [5, R, W, ...]
  Var row;  // [5, W, R, ...]
};

/// Pi: vertex features [V, ...] to the 10 rectangles.
template <class T>
CrownVar to_crown(Graph<T>& g, Var x, const CrownIndex& index);
/// Pi^-1: mean over duplicate cells back to [V, ...].
template <class T>
Var from_crown(Graph<T>& g, const CrownVar& c, const CrownIndex& index);

/// CrownConv: pad + conv on the column rectangles with `w`, on the row
/// rectangles with rot90(w). Works for 2D and 3D activations.
template <class T>
CrownVar crown_conv(Graph<T>& g, const CrownVar& x, Var w, Var b, int stride);
template <class T>
CrownVar crown_relu(Graph<T>& g, const CrownVar& x);
template <class T>
CrownVar crown_add(Graph<T>& g, const CrownVar& a, const CrownVar& b);

/// Soft argmax over sphere indices 1..N of a [V, N] score: [V].
template <class T>
Var soft_argmax(Graph<T>& g, Var scores);

/// Mean Huber loss between pred [V] and a constant target [V].
template <class T>
Var huber_loss(Graph<T>& g, Var pred, const Tensor<T>& target, T delta = T(1));

}  // namespace icosweep::nn
