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

#include "spc/ablation.h"


#include "spc/analysis.h"
#include "spc/codec.h"
#include "spc/entropy_models.h"
#include "spc/error.h"
#include "spc/ops.h"

namespace spc {
namespace {

// A 1-row map holding every class once, so all prior columns are present.
SemanticMap AllPresentMap(size_t num_classes) {
  std::vector<uint8_t> labels(num_classes);
  for (size_t n = 0; n < num_classes; ++n) labels[n] = static_cast<uint8_t>(n);
  return SemanticMap(num_classes, 1, num_classes, std::move(labels));
}

}  // namespace

Model TrainEntropyModel(const ModelConfig& config,
                        const std::vector<SemanticPrior>& train, int steps,
                        double lr, uint64_t seed) {
  Require(!train.empty(), "ablate", "no training priors");
  Model model = InitModel(config, seed);
  ParamStore entropy;
  for (const std::string& name : model.params.Names()) {
    if (IsEntropyParam(name)) entropy.Add(name, model.params.Get(name));
  }
  Rng rng(seed ^ 0xA5A5A5A5ull);
  AdamOptions adam;
  adam.lr = lr;
  for (int step = 0; step < steps; ++step) {
    const SemanticPrior& prior = train[rng.UniformInt(train.size())];
    const double symbols =
        static_cast<double>(prior.channels() * prior.num_classes());
    const LossAndGrads lg = ForwardBackward(entropy, [&](Graph& g) {
      RateVars rv = BuildRate(g, g.Constant(prior.vectors()), prior.presence(),
                              config, QuantMode::kTrain, &rng);
      return ops::Scale(rv.total_bits, 1.0 / symbols);
    });
    AdamStep(entropy, lg.grads, adam);
  }
  for (const std::string& name : entropy.Names()) {
    model.params.Mutable(name) = entropy.Get(name);
  }
  return model;
}

VariantBits MeasureTextureBits(const Model& model,
                               const std::vector<SemanticPrior>& priors) {
  VariantBits out;
  out.variant = model.config.variant;
  for (const SemanticPrior& prior : priors) {
    const SemanticMap map = AllPresentMap(prior.num_classes());
    const EncodedPrior enc = EncodePrior(model, map, prior);
    out.coded_bits += 8.0 * static_cast<double>(enc.coded.hyper_segment.size() +
                                                enc.coded.prior_segment.size());
    out.hyper_bits += 8.0 * static_cast<double>(enc.coded.hyper_segment.size());
    ModelConfig coding = model.config;
    coding.delta = CodingStep(model.config);
    out.estimated_bits +=
        Rate(prior, model.params, coding, QuantMode::kTest, nullptr).total_bits;
  }
  return out;
}

AblationResult RunAblation(
    const TrainConfig& config,
    const std::function<void(const std::string&)>& progress) {
  Rng rng(config.seed);
  const size_t c = static_cast<size_t>(config.model.channels);
  const size_t n = config.ablation_classes;
  Rng mixing_rng = rng.Fork();
  const CorrelatedPriorGenerator generator(c, config.ablation_scale,
                                           config.ablation_snr, mixing_rng);
  std::vector<SemanticPrior> train, test;
  for (size_t i = 0; i < config.ablation_samples; ++i) {
    train.push_back(generator.Prior(n, rng));
  }
  for (size_t i = 0; i < config.ablation_test_samples; ++i) {
    test.push_back(generator.Prior(n, rng));
  }

  AblationResult result;
  result.test_samples = test.size();
  result.symbols_per_sample = c * n;
  ModelConfig base = config.model;
  base.num_classes = static_cast<int>(n);
  for (EntropyVariant variant :
       {EntropyVariant::kHyperprior, EntropyVariant::kFactorized}) {
    ModelConfig mc = base;
    mc.variant = variant;
    if (progress) progress("training " + VariantName(variant) + " entropy model");
    const Model model = TrainEntropyModel(mc, train, config.ablation_steps,
                                          config.lr, config.seed);
    VariantBits bits = MeasureTextureBits(model, test);
    (variant == EntropyVariant::kHyperprior ? result.hyperprior
                                            : result.factorized) = bits;
  }
  return result;
}

}  // namespace spc
