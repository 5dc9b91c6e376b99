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

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "icosweep/tensor.hpp"

namespace icosweep::nn {

/// Trainable tensor with its accumulated gradient.
template <class T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  Parameter() = default;
  Parameter(std::string n, Tensor<T> v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}
  void zero_grad() { grad = Tensor<T>(value.shape()); }
};

/// Handle to a node of a Graph.
struct Var {
  std::uint32_t id = UINT32_MAX;
  bool valid() const { return id != UINT32_MAX; }
};

/// Reverse-mode tape. Nodes are appended in evaluation order; backward() walks
/// them in reverse and calls each node's adjoint. A graph has a single writer;
/// distinct graphs may be used concurrently.
template <class T>
class Graph {
 public:
  /// Propagates the node's output gradient into its inputs' gradients.
  using Adjoint = std::function<void(Graph&, const Tensor<T>& out_grad)>;

  Var constant(Tensor<T> value);
  Var parameter(Parameter<T>& p);
  /// Records an op output. `requires_grad` should be true iff any input does.
  Var record(Tensor<T> value, bool requires_grad, Adjoint adjoint);

  const Tensor<T>& value(Var v) const { return node(v).value; }
  bool requires_grad(Var v) const { return node(v).requires_grad; }
  /// Gradient buffer of `v`, zero-initialised on first access.
  Tensor<T>& grad(Var v);
  bool has_grad(Var v) const { return !node(v).grad.empty() || node(v).value.empty(); }

  /// Seeds d(out)/d(out) = 1 (out must be a scalar) and runs the tape.
  /// Parameter gradients are added into Parameter::grad.
  void backward(Var out);
  void backward(Var out, const Tensor<T>& seed);

  std::size_t size() const { return nodes_.size(); }
  /// When set, every recorded value is checked for NaN/Inf.
  void set_check_finite(bool on) { check_finite_ = on; }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad = false;
    Parameter<T>* param = nullptr;
    Adjoint adjoint;
  };
  Node& node(Var v);
  const Node& node(Var v) const;

  std::deque<Node> nodes_;
  bool check_finite_ = false;
  bool done_ = false;
};

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace icosweep::nn
