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

#ifndef SPC_PARAM_STORE_H_
#define SPC_PARAM_STORE_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "spc/tensor.h"

namespace spc {

using GradMap = std::map<std::string, Tensor>;

// Named trainable tensors plus Adam state. Names iterate in sorted order,
// which fixes the serialization and update order.
class ParamStore {
 public:
  void Add(const std::string& name, Tensor value);
  bool Contains(const std::string& name) const;
  const Tensor& Get(const std::string& name) const;
  Tensor& Mutable(const std::string& name);
  std::vector<std::string> Names() const;
  size_t size() const { return entries_.size(); }

  const Tensor& FirstMoment(const std::string& name) const;
  const Tensor& SecondMoment(const std::string& name) const;
  int64_t step() const { return step_; }

  // Drops optimizer state; parameter values are kept.
  void ResetOptimizer();

  // Values only; optimizer state is ignored.
  bool SameValues(const ParamStore& other) const;

 private:
  friend void AdamStep(ParamStore&, const GradMap&, double, double, double,
                       double);
  struct Entry {
    Tensor value;
    Tensor m;
    Tensor v;
  };
  const Entry& Find(const std::string& name) const;

  std::map<std::string, Entry> entries_;
  int64_t step_ = 0;
};

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam update over every parameter in the store. A
// parameter without a gradient entry, or with a mis-shaped one, is an error.
void AdamStep(ParamStore& params, const GradMap& grads, double lr,
              double beta1, double beta2, double eps);

inline void AdamStep(ParamStore& params, const GradMap& grads,
                     const AdamOptions& options) {
  AdamStep(params, grads, options.lr, options.beta1, options.beta2,
           options.eps);
}

}  // namespace spc

#endif  // SPC_PARAM_STORE_H_
