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

#include "spc/param_store.h"

#include <cmath>

#include "spc/error.h"

namespace spc {

void ParamStore::Add(const std::string& name, Tensor value) {
  Require(!Contains(name), "param_store", "duplicate parameter " + name);
  Tensor zeros(value.shape());
  entries_.emplace(name, Entry{std::move(value), zeros, zeros});
}

bool ParamStore::Contains(const std::string& name) const {
  return entries_.count(name) != 0;
}

const ParamStore::Entry& ParamStore::Find(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    Fail(ErrorCode::kInvalidArgument, "param_store",
         "unknown parameter " + name);
  }
  return it->second;
}

const Tensor& ParamStore::Get(const std::string& name) const {
  return Find(name).value;
}

Tensor& ParamStore::Mutable(const std::string& name) {
  return const_cast<Entry&>(Find(name)).value;
}

std::vector<std::string> ParamStore::Names() const {
  std::vector<std::string> names;
  names.reserve(entries_.size());
  for (const auto& [name, entry] : entries_) names.push_back(name);
  return names;
}

const Tensor& ParamStore::FirstMoment(const std::string& name) const {
  return Find(name).m;
}

const Tensor& ParamStore::SecondMoment(const std::string& name) const {
  return Find(name).v;
}

void ParamStore::ResetOptimizer() {
  for (auto& [name, entry] : entries_) {
    entry.m.Fill(0.0);
    entry.v.Fill(0.0);
  }
  step_ = 0;
}

bool ParamStore::SameValues(const ParamStore& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (const auto& [name, entry] : entries_) {
    auto it = other.entries_.find(name);
    if (it == other.entries_.end() || !(it->second.value == entry.value)) {
      return false;
    }
  }
  return true;
}

void AdamStep(ParamStore& params, const GradMap& grads, double lr,
              double beta1, double beta2, double eps) {
  for (const auto& [name, entry] : params.entries_) {
    auto it = grads.find(name);
    if (it == grads.end()) {
      Fail(ErrorCode::kInvalidArgument, "adam_step",
           "missing gradient for " + name);
    }
    if (!it->second.SameShape(entry.value)) {
      Fail(ErrorCode::kInvalidArgument, "adam_step",
           "gradient shape " + ShapeToString(it->second.shape()) +
               " does not match " + name + " " +
               ShapeToString(entry.value.shape()));
    }
  }
  const int64_t t = params.step_ + 1;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (auto& [name, entry] : params.entries_) {
    const Tensor& g = grads.at(name);
    for (size_t i = 0; i < g.size(); ++i) {
      entry.m[i] = beta1 * entry.m[i] + (1.0 - beta1) * g[i];
      entry.v[i] = beta2 * entry.v[i] + (1.0 - beta2) * g[i] * g[i];
      const double m_hat = entry.m[i] / c1;
      const double v_hat = entry.v[i] / c2;
      entry.value[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
  params.step_ = t;
}

}  // namespace spc
