// Copyright 2026 The SPC Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spc/autodiff.h"

#include "spc/error.h"

namespace spc {

Var Graph::Push(Tensor value, bool requires_grad) {
  nodes_.push_back(Node{std::move(value), Tensor(), requires_grad, nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Graph::Constant(Tensor value) { return Push(std::move(value), false); }

Var Graph::Leaf(Tensor value) { return Push(std::move(value), true); }

Var Graph::Param(const std::string& name) {
  auto it = param_nodes_.find(name);
  if (it != param_nodes_.end()) return Var(this, it->second);
  if (params_ == nullptr) {
    Fail(ErrorCode::kInvalidArgument, "graph",
         "parameter " + name + " requested without a bound store");
  }
  Var v = Push(params_->Get(name), true);
  param_nodes_.emplace(name, v.id());
  return v;
}

Tensor Graph::grad(Var v) const {
  const Node& node = nodes_[v.id()];
  if (node.grad.empty() && !node.value.empty()) {
    return Tensor(node.value.shape());
  }
  return node.grad;
}

Var Graph::Record(std::string_view op, Tensor value,
                  std::initializer_list<Var> inputs, BackwardFn backward) {
  if (!value.AllFinite()) {
    Fail(ErrorCode::kNumeric, op, "non-finite output");
  }
  bool requires_grad = false;
  for (Var in : inputs) {
    if (in.graph() != this) {
      Fail(ErrorCode::kInvalidArgument, op, "input from a different graph");
    }
    requires_grad = requires_grad || nodes_[in.id()].requires_grad;
  }
  Var out = Push(std::move(value), requires_grad);
  if (requires_grad) nodes_[out.id()].backward = std::move(backward);
  return out;
}

Tensor& Graph::AccumGrad(Var v) {
  Node& node = nodes_[v.id()];
  if (node.grad.empty()) node.grad = Tensor(node.value.shape());
  return node.grad;
}

void Graph::Backward(Var loss) {
  if (value(loss).size() != 1) {
    Fail(ErrorCode::kInvalidArgument, "backward",
         "loss must be a scalar, got shape " +
             ShapeToString(value(loss).shape()));
  }
  for (Node& node : nodes_) node.grad = Tensor();
  AccumGrad(loss)[0] = 1.0;
  for (int id = loss.id(); id >= 0; --id) {
    Node& node = nodes_[id];
    if (!node.backward || node.grad.empty()) continue;
    node.backward(node.grad);
    if (!node.grad.AllFinite()) {
      Fail(ErrorCode::kNumeric, "backward", "non-finite gradient");
    }
  }
}

GradMap Graph::ParamGrads() const {
  GradMap grads;
  if (params_ == nullptr) return grads;
  for (const std::string& name : params_->Names()) {
    auto it = param_nodes_.find(name);
    if (it == param_nodes_.end()) {
      grads.emplace(name, Tensor(params_->Get(name).shape()));
    } else {
      grads.emplace(name, grad(Var(const_cast<Graph*>(this), it->second)));
    }
  }
  return grads;
}

LossAndGrads ForwardBackward(const ParamStore& params,
                             const std::function<Var(Graph&)>& build) {
  Graph graph(&params);
  Var loss = build(graph);
  graph.Backward(loss);
  return {graph.value(loss).item(), graph.ParamGrads()};
}

}  // namespace spc
