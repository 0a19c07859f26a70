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

#ifndef SPC_MODEL_CONFIG_H_
#define SPC_MODEL_CONFIG_H_

#include <cstdint>
#include <string>

namespace spc {

// How the texture layer is entropy coded.
enum class EntropyVariant : uint8_t {
  kHyperprior = 0,  // cross-channel hyperprior + conditional Gaussian
  kFactorized = 1,  // per-channel factorized density, no side information
};

std::string VariantName(EntropyVariant variant);

struct ModelConfig {
  int channels = 64;     // C, texture channels
  int num_classes = 19;  // N, semantic classes
  double delta = 0.01;   // quantization step for both prior and hyperprior
  int texnet_hidden = 32;
  int synnet_hidden = 32;
  bool use_coords = true;  // synthesizer sees normalized pixel coordinates
  EntropyVariant variant = EntropyVariant::kHyperprior;

  int hyper_channels() const { return channels / 16; }
  double sigma_min() const { return 0.1 * delta; }

  // Throws kInvalidArgument on an unusable configuration.
  void Validate() const;

  bool operator==(const ModelConfig&) const = default;
};

}  // namespace spc

#endif  // SPC_MODEL_CONFIG_H_
