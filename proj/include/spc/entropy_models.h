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

#ifndef SPC_ENTROPY_MODELS_H_
#define SPC_ENTROPY_MODELS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "spc/autodiff.h"
#include "spc/model_config.h"
#include "spc/param_store.h"
#include "spc/rng.h"
#include "spc/semantic_prior.h"
#include "spc/tensor.h"

namespace spc {

// Probabilities are floored at 2^-40 before taking -log2.
inline constexpr double kProbabilityFloor = 0x1.0p-40;

struct Quantizer {
  double step = 0.01;
};

enum class QuantMode { kTrain, kTest };

// Nearest grid index, ties away from zero.
int64_t QuantizeIndex(double value, double step);

// Test mode: step * round(v / step). Train mode: v + u with u uniform on
// (-step/2, step/2) drawn from `rng` (required in train mode).
Tensor Quantize(const Tensor& values, const Quantizer& q, QuantMode mode,
                Rng* rng);

// Conditional Gaussian parameters for the prior, both (C, N).
struct GaussianParams {
  Tensor mean;
  Tensor scale;
};

// Channel-summary latents for the prior, (C / 16, N).
struct Hyperprior {
  Tensor latents;
  Tensor quantized;  // grid values, step * index
};

// Learned univariate cumulative per channel: a composition of four
// monotone layers of widths 1 -> 3 -> 3 -> 3 -> 1 with positive matrices
// and tanh gates, read through a logistic. Parameters live in a ParamStore
// under `prefix`.
class FactorizedDensity {
 public:
  FactorizedDensity(std::string prefix, size_t channels)
      : prefix_(std::move(prefix)), channels_(channels) {}

  const std::string& prefix() const { return prefix_; }
  size_t channels() const { return channels_; }

  // `init_scale` sets the initial spread of the cumulative.
  void Init(ParamStore& params, double init_scale, Rng& rng) const;

  // Logit of the cumulative at x (G, M) -> (G, M).
  Var BuildLogits(Graph& graph, Var x) const;
  // Mass of [v - step/2, v + step/2) per element of v (G, M).
  Var BuildLikelihood(Graph& graph, Var values, double step) const;

  // Evaluation without gradients.
  Tensor Cdf(const ParamStore& params, const Tensor& x) const;
  Tensor Likelihood(const ParamStore& params, const Tensor& values,
                    double step) const;

 private:
  std::string Name(const char* what, int layer) const;

  std::string prefix_;
  size_t channels_;
};

inline constexpr char kHyperDensityPrefix[] = "hyper_density";
inline constexpr char kPriorDensityPrefix[] = "prior_density";

// Parameters for the configured entropy variant: hyper-encoder/decoder and a
// hyperprior density, or a per-channel prior density.
void InitEntropyModels(ParamStore& params, const ModelConfig& config, Rng& rng);

// Hyper-encoder C -> C/2 -> C/8 -> C/16 and hyper-decoder C/16 -> C/8 ->
// C/2 -> 2C, 1x1 mixing over regions with ReLU between layers.
Var BuildHyperEncoder(Graph& graph, Var prior, const ModelConfig& config);
struct GaussianVars {
  Var mean;
  Var scale;
};
GaussianVars BuildHyperDecoder(Graph& graph, Var z, const ModelConfig& config);

Hyperprior HyperEncode(const SemanticPrior& prior, const ParamStore& params,
                       const ModelConfig& config);
GaussianParams HyperDecode(const Tensor& z_tilde, const ParamStore& params,
                           const ModelConfig& config);

struct BitsResult {
  Tensor probabilities;  // per symbol, floored; 1 for masked-out columns
  double total_bits = 0.0;
};

// Discretized Gaussian cost of integer symbols (C, N) under `gp`. Columns
// with presence false are skipped; pass an empty presence to code all.
BitsResult GaussianBits(const Tensor& symbols, const GaussianParams& gp,
                        double step, const std::vector<bool>& presence = {});

// Cost of integer symbols (G, N) under a factorized density.
BitsResult FactorizedBits(const Tensor& symbols, const FactorizedDensity& fd,
                          const ParamStore& params, double step,
                          const std::vector<bool>& presence = {});

struct RateResult {
  Tensor t_tilde;  // quantized (or noisy) prior, (C, N)
  Tensor z_tilde;  // quantized (or noisy) hyperprior; empty when factorized
  double prior_bits = 0.0;
  double hyper_bits = 0.0;
  double total_bits = 0.0;
};

struct RateVars {
  Var t_tilde;
  Var z_tilde;  // invalid for the factorized variant
  Var prior_bits;
  Var hyper_bits;  // invalid for the factorized variant
  Var total_bits;
};

// Differentiable rate of a (C, N) prior. Train mode adds uniform noise
// from `rng`; test mode rounds.
RateVars BuildRate(Graph& graph, Var prior, const std::vector<bool>& presence,
                   const ModelConfig& config, QuantMode mode, Rng* rng);

RateResult Rate(const SemanticPrior& prior, const ParamStore& params,
                const ModelConfig& config, QuantMode mode, Rng* rng);

}  // namespace spc

#endif  // SPC_ENTROPY_MODELS_H_
