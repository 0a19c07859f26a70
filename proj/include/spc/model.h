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

#ifndef SPC_MODEL_H_
#define SPC_MODEL_H_

#include <cstdint>

#include "spc/model_config.h"
#include "spc/param_store.h"

namespace spc {

// Everything the encoder and decoder must share.
struct Model {
  ModelConfig config;
  ParamStore params;
};

// Fresh parameters for every network the configuration uses.
Model InitModel(const ModelConfig& config, uint64_t seed);

// Names of the rate-side parameters (hyper-networks and densities).
bool IsEntropyParam(const std::string& name);

}  // namespace spc

#endif  // SPC_MODEL_H_
