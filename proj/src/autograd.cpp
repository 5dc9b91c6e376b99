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

#include "icosweep/autograd.hpp"

#include "icosweep/error.hpp"

namespace icosweep::nn {

template <class T>
typename Graph<T>::Node& Graph<T>::node(Var v) {
  if (!v.valid() || v.id >= nodes_.size()) throw ContractViolation("graph: unknown variable");
  return nodes_[v.id];
}

template <class T>
const typename Graph<T>::Node& Graph<T>::node(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) throw ContractViolation("graph: unknown variable");
  return nodes_[v.id];
}

template <class T>
Var Graph<T>::constant(Tensor<T> value) {
  return record(std::move(value), false, {});
}

template <class T>
Var Graph<T>::parameter(Parameter<T>& p) {
  Var v = record(p.value, true, {});
  nodes_.back().param = &p;
  return v;
}

template <class T>
Var Graph<T>::record(Tensor<T> value, bool requires_grad, Adjoint adjoint) {
  if (done_) throw ContractViolation("graph: cannot record after backward");
  if (check_finite_ && !value.all_finite()) {
    throw NumericError("graph: non-finite value at node " + std::to_string(nodes_.size()));
  }
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.adjoint = std::move(adjoint);
  nodes_.push_back(std::move(n));
  return Var{std::uint32_t(nodes_.size() - 1)};
}

template <class T>
Tensor<T>& Graph<T>::grad(Var v) {
  Node& n = node(v);
  if (n.grad.empty() && !n.value.empty()) n.grad = Tensor<T>(n.value.shape());
  return n.grad;
}

template <class T>
void Graph<T>::backward(Var out) {
  if (node(out).value.size() != 1) throw ContractViolation("backward: output must be a scalar");
  backward(out, Tensor<T>(node(out).value.shape(), T(1)));
}

template <class T>
void Graph<T>::backward(Var out, const Tensor<T>& seed) {
  if (nodes_.empty()) throw ContractViolation("backward: nothing recorded");
  if (done_) throw ContractViolation("backward: already run on this graph");
  Node& o = node(out);
  if (seed.shape() != o.value.shape()) throw ContractViolation("backward: seed shape mismatch");
  done_ = true;
  if (!o.requires_grad) return;
  o.grad = seed;
  for (std::size_t i = out.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.adjoint) n.adjoint(*this, n.grad);
    if (n.param) {
      auto& pg = n.param->grad;
      if (pg.shape() != n.grad.shape()) pg = Tensor<T>(n.grad.shape());
      for (std::size_t k = 0; k < pg.size(); ++k) pg[k] += n.grad[k];
    }
  }
}

template class Graph<float>;
template class Graph<double>;

}  // namespace icosweep::nn
