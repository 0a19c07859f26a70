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

#ifndef SPC_TRAINER_H_
#define SPC_TRAINER_H_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "spc/autodiff.h"
#include "spc/entropy_models.h"
#include "spc/image.h"
#include "spc/model.h"

namespace spc {

// Distortion between a reconstruction (3, H, W) and the target planes.
using Distortion =
    std::function<Var(Graph& graph, Var reconstruction, const Tensor& target)>;

Distortion MseDistortion();

struct RdVars {
  Var loss;
  Var bits;
  Var distortion;
  Var reconstruction;
};

// loss = lambda * bits + distortion, with the noisy (train) or rounded
// (test) prior feeding both the rate and the synthesizer.
RdVars BuildRdLoss(Graph& graph, const Image& image, const SemanticMap& map,
                   const ModelConfig& config, double lambda, QuantMode mode,
                   Rng* rng, const Distortion& distortion = MseDistortion());

struct RdResult {
  double loss = 0.0;
  double bits = 0.0;
  double distortion = 0.0;
  GradMap grads;
};

// Train-mode loss and gradients for every parameter of `model`.
RdResult RdLoss(const Model& model, const Image& image, const SemanticMap& map,
                double lambda, Rng& rng,
                const Distortion& distortion = MseDistortion());

// Test-mode loss without gradients.
RdResult EvaluateRd(const Model& model, const Image& image,
                    const SemanticMap& map, double lambda,
                    const Distortion& distortion = MseDistortion());

// Settings read from a key=value file. Lines starting with '#' and blank
// lines are ignored.
struct TrainConfig {
  ModelConfig model;
  double lambda = 1.0;
  double lr = 1e-4;
  int epochs = 10;
  uint64_t seed = 1;
  std::string dataset;
  size_t max_images = 0;  // 0 keeps every pair

  // Ablation generator and schedule.
  size_t ablation_samples = 200;
  size_t ablation_test_samples = 100;
  size_t ablation_classes = 19;
  int ablation_steps = 1500;
  double ablation_scale = 0.05;
  double ablation_snr = 10.0;
};

TrainConfig ParseTrainConfig(const std::string& text);
TrainConfig LoadTrainConfig(const std::string& path);

struct Sample {
  std::string name;
  Image image;
  SemanticMap map;
};

// Pairs stem.ppm with stem.pgm in `dir`, in name order. Unreadable pairs
// are skipped and reported through `warnings`; no readable pair is an error.
std::vector<Sample> LoadDataset(const std::string& dir, size_t num_classes,
                                std::vector<std::string>* warnings);

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  double bits = 0.0;
  double distortion = 0.0;
};

struct TrainResult {
  Model best;
  double best_loss = 0.0;
  int best_epoch = 0;
  std::vector<EpochLog> log;
};

// Adam over single-image steps in a seeded order, using the first
// `max_images` samples when that is nonzero. The returned model is the
// end-of-epoch snapshot with the lowest mean epoch loss.
TrainResult Train(const TrainConfig& config, const std::vector<Sample>& data,
                  const std::function<void(const EpochLog&)>& on_epoch = {},
                  const Distortion& distortion = MseDistortion());

}  // namespace spc

#endif  // SPC_TRAINER_H_
