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

#include "spc/semantic_prior.h"

#include <cmath>

#include "spc/error.h"
#include "spc/ops.h"

namespace spc {
namespace {

// The second TexNet convolution starts small so initial priors sit within a
// few quantization steps of each other.
constexpr double kFeatureInitGain = 0.1;

Tensor RandomNormal(Shape shape, double stddev, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = stddev * rng.Normal();
  return t;
}

size_t U(int v) { return static_cast<size_t>(v); }

void CheckMapMatches(std::string_view op, const Shape& shape,
                     const SemanticMap& map) {
  if (shape.size() != 3 || shape[1] != map.height() ||
      shape[2] != map.width()) {
    Fail(ErrorCode::kInvalidArgument, op,
         "feature shape " + ShapeToString(shape) + " does not match map " +
             std::to_string(map.height()) + "x" + std::to_string(map.width()));
  }
}

}  // namespace

SemanticPrior::SemanticPrior(Tensor vectors, std::vector<bool> presence)
    : vectors_(std::move(vectors)), presence_(std::move(presence)) {
  Require(vectors_.rank() == 2, "semantic_prior", "vectors must be (C, N)");
  Require(presence_.size() == vectors_.dim(1), "semantic_prior",
          "presence length must equal N");
  for (size_t n = 0; n < presence_.size(); ++n) {
    if (presence_[n]) continue;
    for (size_t c = 0; c < vectors_.dim(0); ++c) {
      if (vectors_.at(c, n) != 0.0) {
        Fail(ErrorCode::kInvalidArgument, "semantic_prior",
             "absent class " + std::to_string(n) + " has a non-zero vector");
      }
    }
  }
}

Tensor PresenceMask(const std::vector<bool>& presence, size_t rows) {
  const size_t n = presence.size();
  Tensor mask({rows, n});
  for (size_t r = 0; r < rows; ++r) {
    for (size_t k = 0; k < n; ++k) mask.at(r, k) = presence[k] ? 1.0 : 0.0;
  }
  return mask;
}

Tensor CoordinateChannels(size_t height, size_t width) {
  Tensor coords({2, height * width});
  for (size_t y = 0; y < height; ++y) {
    for (size_t x = 0; x < width; ++x) {
      const size_t p = y * width + x;
      coords.at(0, p) =
          width > 1 ? 2.0 * static_cast<double>(x) / (width - 1) - 1.0 : 0.0;
      coords.at(1, p) =
          height > 1 ? 2.0 * static_cast<double>(y) / (height - 1) - 1.0 : 0.0;
    }
  }
  return coords;
}

void InitTexNet(ParamStore& params, const ModelConfig& config, Rng& rng) {
  const size_t hidden = U(config.texnet_hidden), c = U(config.channels);
  params.Add("texnet.conv1.w",
             RandomNormal({hidden, 3, 3, 3}, std::sqrt(2.0 / 27.0), rng));
  params.Add("texnet.conv1.b", Tensor({hidden}));
  params.Add("texnet.conv2.w",
             RandomNormal({c, hidden, 3, 3},
                          kFeatureInitGain * std::sqrt(2.0 / (9.0 * hidden)),
                          rng));
  params.Add("texnet.conv2.b", Tensor({c}));
}

void InitSynNet(ParamStore& params, const ModelConfig& config, Rng& rng) {
  const size_t hidden = U(config.synnet_hidden), c = U(config.channels);
  const double fan_in = static_cast<double>(c + (config.use_coords ? 2 : 0));
  params.Add("synnet.mix1.w",
             RandomNormal({hidden, c}, std::sqrt(2.0 / fan_in), rng));
  if (config.use_coords) {
    params.Add("synnet.mix1.coord_w",
               RandomNormal({hidden, 2}, std::sqrt(2.0 / fan_in), rng));
  }
  params.Add("synnet.mix1.b", Tensor({hidden}, 0.1));
  params.Add("synnet.mix2.w",
             RandomNormal({3, hidden}, std::sqrt(1.0 / hidden), rng));
  params.Add("synnet.mix2.b", Tensor({3}, 0.5));
}

Var BuildFeatures(Graph& graph, Var image,
                  [[maybe_unused]] const ModelConfig& config) {
  Var h = ops::Relu(ops::AddBias(
      ops::Conv3x3(image, graph.Param("texnet.conv1.w")),
      graph.Param("texnet.conv1.b")));
  return ops::AddBias(ops::Conv3x3(h, graph.Param("texnet.conv2.w")),
                      graph.Param("texnet.conv2.b"));
}

Var BuildPrior(Graph& graph, Var image, const SemanticMap& map,
               const ModelConfig& config) {
  CheckMapMatches("extract_prior", image.shape(), map);
  const size_t c = U(config.channels), hidden = U(config.texnet_hidden);
  Var h = ops::Relu(ops::AddBias(
      ops::Conv3x3(image, graph.Param("texnet.conv1.w")),
      graph.Param("texnet.conv1.b")));
  // Pooling is linear, so mean(conv(h)) == W * mean(patches(h)) + b.
  Var patches = ops::RegionPatchMean(h, map.labels(), map.num_classes());
  Var kernel = ops::Reshape(graph.Param("texnet.conv2.w"), {c, hidden * 9});
  Var prior = ops::AddBias(ops::MatMul(kernel, patches),
                           graph.Param("texnet.conv2.b"));
  return ops::MulConstant(prior, PresenceMask(map.Presence(), c));
}

Var BuildSynthesis(Graph& graph, Var prior, const SemanticMap& map,
                   const ModelConfig& config) {
  const size_t h = map.height(), w = map.width();
  const size_t hidden = U(config.synnet_hidden);
  if (prior.shape() != Shape{U(config.channels), map.num_classes()}) {
    Fail(ErrorCode::kInvalidArgument, "synthesize",
         "prior shape " + ShapeToString(prior.shape()) +
             " does not match configuration");
  }
  // Mixing the broadcast prior equals broadcasting the mixed prior, so the
  // first layer is applied per class before going to pixel resolution.
  Var mixed = ops::MatMul(graph.Param("synnet.mix1.w"), prior);
  Var pre = ops::RegionBroadcast(mixed, map.labels(), h, w);
  if (config.use_coords) {
    Var coords = graph.Constant(CoordinateChannels(h, w));
    Var coord_term = ops::Reshape(
        ops::MatMul(graph.Param("synnet.mix1.coord_w"), coords), {hidden, h, w});
    pre = ops::Add(pre, coord_term);
  }
  Var act = ops::Relu(ops::AddBias(pre, graph.Param("synnet.mix1.b")));
  Var rgb = ops::MatMul(graph.Param("synnet.mix2.w"),
                        ops::Reshape(act, {hidden, h * w}));
  rgb = ops::AddBias(rgb, graph.Param("synnet.mix2.b"));
  return ops::Reshape(rgb, {3, h, w});
}

Tensor ExtractFeatures(const Image& image, const ParamStore& params,
                       const ModelConfig& config) {
  if (image.width() < 8 || image.height() < 8) {
    Fail(ErrorCode::kInvalidArgument, "extract_features",
         "image must be at least 8x8");
  }
  Graph graph(&params);
  return graph.value(
      BuildFeatures(graph, graph.Constant(image.planes()), config));
}

SemanticPrior PoolPrior(const Tensor& features, const SemanticMap& map) {
  CheckMapMatches("pool_prior", features.shape(), map);
  const size_t c = features.dim(0), n = map.num_classes(), hw = map.pixels();
  const std::vector<size_t> counts = map.ClassCounts();
  Tensor vectors({c, n});
  for (size_t ci = 0; ci < c; ++ci) {
    const double* src = features.ptr() + ci * hw;
    for (size_t p = 0; p < hw; ++p) vectors.at(ci, map.labels()[p]) += src[p];
    for (size_t k = 0; k < n; ++k) {
      if (counts[k] > 0) vectors.at(ci, k) /= static_cast<double>(counts[k]);
    }
  }
  return SemanticPrior(std::move(vectors), map.Presence());
}

SemanticPrior ExtractPrior(const Image& image, const SemanticMap& map,
                           const ParamStore& params, const ModelConfig& config) {
  if (image.width() < 8 || image.height() < 8) {
    Fail(ErrorCode::kInvalidArgument, "extract_prior",
         "image must be at least 8x8");
  }
  Graph graph(&params);
  Var prior = BuildPrior(graph, graph.Constant(image.planes()), map, config);
  return SemanticPrior(graph.value(prior), map.Presence());
}

Tensor BroadcastPrior(const SemanticPrior& prior, const SemanticMap& map) {
  if (prior.num_classes() != map.num_classes()) {
    Fail(ErrorCode::kInvalidArgument, "broadcast_prior",
         "prior has " + std::to_string(prior.num_classes()) +
             " classes, map has " + std::to_string(map.num_classes()));
  }
  const size_t c = prior.channels(), hw = map.pixels();
  Tensor out({c, map.height(), map.width()});
  for (size_t ci = 0; ci < c; ++ci) {
    for (size_t p = 0; p < hw; ++p) {
      out[ci * hw + p] = prior.at(ci, map.labels()[p]);
    }
  }
  return out;
}

Image Synthesize(const SemanticPrior& prior, const SemanticMap& map,
                 const ParamStore& params, const ModelConfig& config) {
  if (prior.num_classes() != map.num_classes()) {
    Fail(ErrorCode::kInvalidArgument, "synthesize",
         "prior and map class counts differ");
  }
  Graph graph(&params);
  Var rgb =
      BuildSynthesis(graph, graph.Constant(prior.vectors()), map, config);
  return Image(graph.value(rgb)).Clamped();
}

SemanticPrior SwapRegionPrior(const SemanticPrior& prior,
                              const SemanticPrior& reference, size_t class_id) {
  Require(prior.channels() == reference.channels() &&
              prior.num_classes() == reference.num_classes(),
          "swap_region_prior", "priors have different shapes");
  Require(class_id < prior.num_classes(), "swap_region_prior",
          "class id out of range");
  Require(reference.present(class_id), "swap_region_prior",
          "class " + std::to_string(class_id) + " is absent from the reference");
  Require(prior.present(class_id), "swap_region_prior",
          "class " + std::to_string(class_id) + " is absent from the target");
  Tensor vectors = prior.vectors();
  for (size_t c = 0; c < prior.channels(); ++c) {
    vectors.at(c, class_id) = reference.at(c, class_id);
  }
  return SemanticPrior(std::move(vectors), prior.presence());
}

}  // namespace spc
