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

#ifndef SPC_AUTODIFF_H_
#define SPC_AUTODIFF_H_

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "spc/param_store.h"
#include "spc/tensor.h"

namespace spc {

class Graph;

// Handle to a node recorded on a Graph.
class Var {
 public:
  Var() = default;

  bool valid() const { return graph_ != nullptr; }
  Graph* graph() const { return graph_; }
  int id() const { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  friend class Graph;
  Var(Graph* graph, int id) : graph_(graph), id_(id) {}

  Graph* graph_ = nullptr;
  int id_ = -1;
};

// Reverse-mode tape. Operators (see ops.h) append nodes with a closure that
// pushes the output gradient back to their inputs. Node values are immutable
// once recorded.
class Graph {
 public:
  using BackwardFn = std::function<void(const Tensor& out_grad)>;

  // `params` may be null for graphs without trainable parameters; it must
  // outlive the graph.
  explicit Graph(const ParamStore* params = nullptr) : params_(params) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var Constant(Tensor value);
  // A differentiable leaf not owned by a ParamStore.
  Var Leaf(Tensor value);
  // Binds a parameter by name; repeated calls return the same node.
  Var Param(const std::string& name);

  const Tensor& value(Var v) const { return nodes_[v.id()].value; }
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  // Gradient after Backward(); zeros when nothing flowed into the node.
  Tensor grad(Var v) const;

  // Seeds d(loss)/d(loss) = 1 and runs every recorded closure in reverse.
  void Backward(Var loss);

  // Gradient for every parameter in the bound store, zeros when unused.
  GradMap ParamGrads() const;

  // Hash of all piecewise-branch decisions taken during the forward pass
  // (ReLU signs, clamps, floors). Two evaluations with equal signatures lie
  // on the same smooth piece.
  uint64_t branch_signature() const { return branch_hash_; }

  // --- Operator implementation interface -------------------------------
  Var Record(std::string_view op, Tensor value, std::initializer_list<Var> inputs,
             BackwardFn backward);
  // Gradient accumulator of `v`, allocated on first use.
  Tensor& AccumGrad(Var v);
  void NoteBranch(bool taken) {
    branch_hash_ = (branch_hash_ ^ (taken ? 0x9Bu : 0x51u)) * 0x100000001B3ull;
  }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var Push(Tensor value, bool requires_grad);

  const ParamStore* params_;
  std::vector<Node> nodes_;
  std::map<std::string, int> param_nodes_;
  uint64_t branch_hash_ = 0xCBF29CE484222325ull;
};

inline const Tensor& Var::value() const { return graph_->value(*this); }

// Evaluates `build` on a fresh graph bound to `params`, back-propagates from
// the scalar it returns and collects one gradient per parameter.
struct LossAndGrads {
  double loss = 0.0;
  GradMap grads;
};
LossAndGrads ForwardBackward(const ParamStore& params,
                             const std::function<Var(Graph&)>& build);

}  // namespace spc

#endif  // SPC_AUTODIFF_H_
