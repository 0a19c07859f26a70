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

#ifndef SPC_SEMANTIC_PRIOR_H_
#define SPC_SEMANTIC_PRIOR_H_

#include <vector>

#include "spc/autodiff.h"
#include "spc/image.h"
#include "spc/model_config.h"
#include "spc/param_store.h"
#include "spc/rng.h"
#include "spc/tensor.h"

namespace spc {

// C x N matrix of per-class texture vectors. Columns of classes that do not
// occur in the source map are zero and flagged absent.
class SemanticPrior {
 public:
  SemanticPrior() = default;
  SemanticPrior(Tensor vectors, std::vector<bool> presence);

  size_t channels() const { return vectors_.dim(0); }
  size_t num_classes() const { return vectors_.dim(1); }
  const Tensor& vectors() const { return vectors_; }
  const std::vector<bool>& presence() const { return presence_; }
  bool present(size_t n) const { return presence_[n]; }
  double at(size_t c, size_t n) const { return vectors_.at(c, n); }

  bool operator==(const SemanticPrior&) const = default;

 private:
  Tensor vectors_;
  std::vector<bool> presence_;
};

// (rows, N) tensor of 0/1 presence flags.
Tensor PresenceMask(const std::vector<bool>& presence, size_t rows);

// (2, H*W) pixel coordinates normalized to [-1, 1].
Tensor CoordinateChannels(size_t height, size_t width);

// Feature extractor: conv3x3(3 -> hidden), ReLU, conv3x3(hidden -> C).
void InitTexNet(ParamStore& params, const ModelConfig& config, Rng& rng);
// Synthesizer: broadcast prior (+ coordinates), 1x1 mix to hidden, ReLU,
// 1x1 mix to RGB.
void InitSynNet(ParamStore& params, const ModelConfig& config, Rng& rng);

// Graph builders. BuildPrior fuses pooling into the second convolution and
// returns the masked (C, N) prior; BuildSynthesis returns the unclamped
// (3, H, W) reconstruction.
Var BuildFeatures(Graph& graph, Var image, const ModelConfig& config);
Var BuildPrior(Graph& graph, Var image, const SemanticMap& map,
               const ModelConfig& config);
Var BuildSynthesis(Graph& graph, Var prior, const SemanticMap& map,
                   const ModelConfig& config);

// (C, H, W) feature map; image must be at least 8x8.
Tensor ExtractFeatures(const Image& image, const ParamStore& params,
                       const ModelConfig& config);

// Semantic-wise average pooling of a (C, H, W) feature map.
SemanticPrior PoolPrior(const Tensor& features, const SemanticMap& map);

// Equivalent to PoolPrior(ExtractFeatures(...)) without materializing the
// full-resolution C-channel map.
SemanticPrior ExtractPrior(const Image& image, const SemanticMap& map,
                           const ParamStore& params, const ModelConfig& config);

// Every pixel labelled n receives column n: (C, H, W).
Tensor BroadcastPrior(const SemanticPrior& prior, const SemanticMap& map);

Image Synthesize(const SemanticPrior& prior, const SemanticMap& map,
                 const ParamStore& params, const ModelConfig& config);

// Replaces column `class_id` of `prior` with the reference's column.
SemanticPrior SwapRegionPrior(const SemanticPrior& prior,
                              const SemanticPrior& reference, size_t class_id);

}  // namespace spc

#endif  // SPC_SEMANTIC_PRIOR_H_
