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

#ifndef SPC_CODEC_H_
#define SPC_CODEC_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spc/bitstream.h"
#include "spc/image.h"
#include "spc/model.h"
#include "spc/semantic_prior.h"

namespace spc {

// The step actually used for coding: the configured step rounded to the
// 32-bit float stored in the container.
double CodingStep(const ModelConfig& config);

struct EncodedPrior {
  CodedImage coded;
  SemanticPrior quantized;  // t~ on the coding grid
  Tensor z_quantized;       // z~, empty for the factorized variant
};

// Codes an already extracted prior; the map supplies the structure layer.
EncodedPrior EncodePrior(const Model& model, const SemanticMap& map,
                         const SemanticPrior& prior);

// Full pipeline: features, pooling, quantization and coding.
EncodedPrior EncodeImage(const Model& model, const Image& image,
                         const SemanticMap& map);

struct DecodedLayers {
  SemanticMap map;
  SemanticPrior prior;  // t~
  Tensor z_quantized;
};

// Recovers both layers. Throws kDataFormat on any inconsistency.
DecodedLayers DecodeLayers(const Model& model, const CodedImage& coded);

Image Reconstruct(const Model& model, const DecodedLayers& layers);

struct RegionBits {
  size_t class_id = 0;
  size_t pixels = 0;
  double prior_bits = 0.0;  // ideal code length under the frozen tables
  double hyper_bits = 0.0;
};

struct RateReport {
  size_t width = 0;
  size_t height = 0;
  size_t present_classes = 0;
  size_t header_bytes = 0;
  size_t map_bytes = 0;
  size_t hyper_bytes = 0;
  size_t prior_bytes = 0;
  size_t total_bytes = 0;
  size_t prior_symbols = 0;
  size_t hyper_symbols = 0;
  std::vector<RegionBits> regions;  // filled only when a model is supplied

  size_t pixels() const { return width * height; }
  double Bpp(size_t bytes) const;
};

// Accounting from the container alone; a model adds per-region bits.
RateReport MakeRateReport(const CodedImage& coded, const Model* model = nullptr);

std::string FormatRateReport(const RateReport& report);
std::string RateReportCsv(const RateReport& report);

}  // namespace spc

#endif  // SPC_CODEC_H_
