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

#include "spc/model_config.h"

#include "spc/error.h"

namespace spc {

std::string VariantName(EntropyVariant variant) {
  return variant == EntropyVariant::kHyperprior ? "hyperprior" : "factorized";
}

void ModelConfig::Validate() const {
  Require(channels >= 16 && channels % 16 == 0, "model_config",
          "channel count must be a positive multiple of 16, got " +
              std::to_string(channels));
  Require(num_classes >= 1 && num_classes <= 255, "model_config",
          "class count must be in [1, 255]");
  Require(delta > 0.0, "model_config", "quantization step must be positive");
  Require(texnet_hidden >= 1 && synnet_hidden >= 1, "model_config",
          "hidden widths must be positive");
}

}  // namespace spc
