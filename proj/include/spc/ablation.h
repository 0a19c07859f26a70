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

#ifndef SPC_ABLATION_H_
#define SPC_ABLATION_H_

#include <functional>
#include <string>
#include <vector>

#include "spc/model.h"
#include "spc/semantic_prior.h"
#include "spc/trainer.h"

namespace spc {

struct VariantBits {
  EntropyVariant variant = EntropyVariant::kHyperprior;
  double coded_bits = 0.0;     // hyperprior + prior segments, range coded
  double estimated_bits = 0.0; // test-mode model estimate
  double hyper_bits = 0.0;     // coded hyperprior segment share
};

struct AblationResult {
  VariantBits hyperprior;
  VariantBits factorized;
  size_t test_samples = 0;
  size_t symbols_per_sample = 0;

  // Fraction of the factorized variant's texture bits saved.
  double saving() const {
    return 1.0 - hyperprior.coded_bits / factorized.coded_bits;
  }
};

// Trains only the rate side of `config.model` on priors, with the total
// bits per symbol as loss.
Model TrainEntropyModel(const ModelConfig& config,
                        const std::vector<SemanticPrior>& train, int steps,
                        double lr, uint64_t seed);

// Texture-layer bits when coding `priors` with `model`.
VariantBits MeasureTextureBits(const Model& model,
                               const std::vector<SemanticPrior>& priors);

// Trains the hyperprior and factorized-only variants on correlated synthetic
// priors and codes a held-out set with each.
AblationResult RunAblation(
    const TrainConfig& config,
    const std::function<void(const std::string&)>& progress = {});

}  // namespace spc

#endif  // SPC_ABLATION_H_
