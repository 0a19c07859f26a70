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

#ifndef SPC_ANALYSIS_H_
#define SPC_ANALYSIS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "spc/image.h"
#include "spc/model.h"
#include "spc/rng.h"
#include "spc/semantic_prior.h"
#include "spc/tensor.h"
#include "spc/trainer.h"

namespace spc {

// Piecewise-textured scene: a block-quantized Voronoi label map where every
// class owns at least one seed block, and per-region base colors with
// tinted noise.
Sample GenerateScene(size_t size, size_t num_classes, Rng& rng);

// Writes scene_XXXX.ppm / scene_XXXX.pgm pairs into `dir`.
void WriteSyntheticDataset(const std::string& dir, size_t count, size_t size,
                           size_t num_classes, uint64_t seed);

// Draws priors t[:, n] = scale * (A f + e), with A a fixed C x 4 mixing
// matrix of unit-norm rows, f ~ N(0, I_4) and e ~ N(0, I / snr).
class CorrelatedPriorGenerator {
 public:
  static constexpr size_t kFactors = 4;

  CorrelatedPriorGenerator(size_t channels, double scale, double snr, Rng& rng);

  Tensor Column(Rng& rng) const;
  SemanticPrior Prior(size_t num_classes, Rng& rng) const;
  const Tensor& mixing() const { return mixing_; }

 private:
  size_t channels_;
  double scale_;
  double noise_std_;
  Tensor mixing_;  // (C, 4)
};

// Draws priors with i.i.d. N(0, scale^2) entries.
class IndependentPriorGenerator {
 public:
  IndependentPriorGenerator(size_t channels, double scale)
      : channels_(channels), scale_(scale) {}

  Tensor Column(Rng& rng) const;
  SemanticPrior Prior(size_t num_classes, Rng& rng) const;

 private:
  size_t channels_;
  double scale_;
};

// Pearson correlation between the rows of `samples` (C x S). A channel with
// zero variance correlates 0 with every other channel and 1 with itself.
Tensor PearsonMatrix(const Tensor& samples);

// Mean |r| over the off-diagonal entries.
double MeanAbsOffDiagonal(const Tensor& matrix);

// Stacks column `class_id` of every prior where the class is present.
// Needs at least 3 such priors.
Tensor CollectClassVectors(const std::vector<SemanticPrior>& priors,
                           size_t class_id);

// Prior vectors of `class_id` across a dataset, correlated channel-wise.
Tensor ChannelCorrelation(const std::vector<Sample>& data, const Model& model,
                          size_t class_id);

// RFC 4180 style CSV, one matrix row per line.
std::string MatrixCsv(const Tensor& matrix);
// 8-bit grayscale heatmap, value v in [-1, 1] mapped to round((v+1)*127.5).
std::vector<uint8_t> MatrixHeatmapPgm(const Tensor& matrix);

}  // namespace spc

#endif  // SPC_ANALYSIS_H_
