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

#include "spc/model.h"

#include "spc/entropy_models.h"
#include "spc/rng.h"
#include "spc/semantic_prior.h"

namespace spc {

Model InitModel(const ModelConfig& config, uint64_t seed) {
  config.Validate();
  Model model;
  model.config = config;
  Rng rng(seed);
  Rng tex_rng = rng.Fork();
  Rng syn_rng = rng.Fork();
  Rng entropy_rng = rng.Fork();
  InitTexNet(model.params, config, tex_rng);
  InitSynNet(model.params, config, syn_rng);
  InitEntropyModels(model.params, config, entropy_rng);
  return model;
}

bool IsEntropyParam(const std::string& name) {
  return name.starts_with("hyper") || name.starts_with(kPriorDensityPrefix);
}

}  // namespace spc
