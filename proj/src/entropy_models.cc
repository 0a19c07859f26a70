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

#include "spc/entropy_models.h"

#include <cmath>

#include "spc/error.h"
#include "spc/ops.h"

namespace spc {
namespace {

constexpr int kDensityLayers = 4;
constexpr size_t kDensityFilters[kDensityLayers + 1] = {1, 3, 3, 3, 1};
constexpr double kHyperDensityInitScale = 1.0;
constexpr double kPriorDensityInitScale = 0.25;
// Initial decoded scale, in quantization steps.
constexpr double kInitialScaleSteps = 10.0;

size_t U(int v) { return static_cast<size_t>(v); }

Tensor RandomNormal(Shape shape, double stddev, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = stddev * rng.Normal();
  return t;
}

struct Layer {
  const char* name;
  size_t out;
  size_t in;
};

std::vector<Layer> EncoderLayers(const ModelConfig& config) {
  const size_t c = U(config.channels);
  return {{"hyper.enc1", c / 2, c}, {"hyper.enc2", c / 8, c / 2},
          {"hyper.enc3", c / 16, c / 8}};
}

std::vector<Layer> DecoderLayers(const ModelConfig& config) {
  const size_t c = U(config.channels);
  return {{"hyper.dec1", c / 8, c / 16}, {"hyper.dec2", c / 2, c / 8},
          {"hyper.dec3", 2 * c, c / 2}};
}

Var MixStack(Graph& graph, Var x, const std::vector<Layer>& layers) {
  for (size_t i = 0; i < layers.size(); ++i) {
    const std::string name = layers[i].name;
    x = ops::AddBias(ops::MatMul(graph.Param(name + ".w"), x),
                     graph.Param(name + ".b"));
    if (i + 1 < layers.size()) x = ops::Relu(x);
  }
  return x;
}

void CheckPresence(std::string_view op, const std::vector<bool>& presence,
                   size_t n) {
  if (!presence.empty() && presence.size() != n) {
    Fail(ErrorCode::kInvalidArgument, op, "presence length does not match N");
  }
}

Tensor MaskFor(const std::vector<bool>& presence, size_t rows, size_t n) {
  if (presence.empty()) return Tensor({rows, n}, 1.0);
  return PresenceMask(presence, rows);
}

Tensor UniformNoise(const Shape& shape, double step, Rng& rng) {
  Tensor noise(shape);
  for (double& v : noise.data()) v = step * (rng.Uniform() - 0.5);
  return noise;
}

Tensor RoundToGrid(const Tensor& values, double step) {
  Tensor out(values.shape());
  for (size_t i = 0; i < values.size(); ++i) {
    out[i] = step * static_cast<double>(QuantizeIndex(values[i], step));
  }
  return out;
}

BitsResult MaskedBits(const Tensor& probabilities, const Tensor& mask) {
  BitsResult result{probabilities, 0.0};
  for (size_t i = 0; i < probabilities.size(); ++i) {
    if (mask[i] == 0.0) {
      result.probabilities[i] = 1.0;
      continue;
    }
    result.probabilities[i] = std::max(probabilities[i], kProbabilityFloor);
    result.total_bits += -std::log2(result.probabilities[i]);
  }
  return result;
}

}  // namespace

int64_t QuantizeIndex(double value, double step) {
  return static_cast<int64_t>(std::round(value / step));
}

Tensor Quantize(const Tensor& values, const Quantizer& q, QuantMode mode,
                Rng* rng) {
  Require(q.step > 0.0, "quantize", "step must be positive");
  if (mode == QuantMode::kTest) return RoundToGrid(values, q.step);
  Require(rng != nullptr, "quantize", "train mode needs a generator");
  Tensor out = values;
  for (double& v : out.data()) v += q.step * (rng->Uniform() - 0.5);
  return out;
}

std::string FactorizedDensity::Name(const char* what, int layer) const {
  return prefix_ + "." + what + std::to_string(layer);
}

void FactorizedDensity::Init(ParamStore& params, double init_scale,
                             Rng& rng) const {
  const double scale = std::pow(init_scale, 1.0 / kDensityLayers);
  for (int k = 0; k < kDensityLayers; ++k) {
    const size_t in = kDensityFilters[k], out = kDensityFilters[k + 1];
    // softplus(raw) == 1 / (scale * out) at initialization.
    const double raw = std::log(std::expm1(1.0 / scale / out));
    params.Add(Name("matrix", k), Tensor({channels_, out, in}, raw));
    Tensor bias({channels_, out});
    for (double& b : bias.data()) b = rng.Uniform(-0.5, 0.5);
    params.Add(Name("bias", k), std::move(bias));
    if (k + 1 < kDensityLayers) {
      params.Add(Name("factor", k), Tensor({channels_, out}));
    }
  }
}

Var FactorizedDensity::BuildLogits(Graph& graph, Var x) const {
  if (x.shape().size() != 2 || x.shape()[0] != channels_) {
    Fail(ErrorCode::kInvalidArgument, "factorized_density",
         "input " + ShapeToString(x.shape()) + " does not have " +
             std::to_string(channels_) + " channels");
  }
  const size_t m = x.shape()[1];
  Var h = ops::Reshape(x, {channels_, 1, m});
  for (int k = 0; k < kDensityLayers; ++k) {
    Var matrix = ops::Softplus(graph.Param(Name("matrix", k)));
    h = ops::BatchedAffine(matrix, graph.Param(Name("bias", k)), h);
    if (k + 1 < kDensityLayers) {
      h = ops::TanhGate(h, ops::Tanh(graph.Param(Name("factor", k))));
    }
  }
  return ops::Reshape(h, {channels_, m});
}

Var FactorizedDensity::BuildLikelihood(Graph& graph, Var values,
                                       double step) const {
  const Tensor half(values.shape(), 0.5 * step);
  Tensor neg_half(values.shape(), -0.5 * step);
  Var lower = BuildLogits(graph, ops::AddConstant(values, neg_half));
  Var upper = BuildLogits(graph, ops::AddConstant(values, half));
  return ops::LogisticIntervalMass(lower, upper);
}

Tensor FactorizedDensity::Cdf(const ParamStore& params, const Tensor& x) const {
  Graph graph(&params);
  Tensor logits = graph.value(BuildLogits(graph, graph.Constant(x)));
  for (double& v : logits.data()) {
    v = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  }
  return logits;
}

Tensor FactorizedDensity::Likelihood(const ParamStore& params,
                                     const Tensor& values, double step) const {
  Graph graph(&params);
  return graph.value(BuildLikelihood(graph, graph.Constant(values), step));
}

void InitEntropyModels(ParamStore& params, const ModelConfig& config,
                       Rng& rng) {
  config.Validate();
  const size_t c = U(config.channels);
  if (config.variant == EntropyVariant::kFactorized) {
    FactorizedDensity(kPriorDensityPrefix, c)
        .Init(params, kPriorDensityInitScale, rng);
    return;
  }
  for (const Layer& layer : EncoderLayers(config)) {
    params.Add(std::string(layer.name) + ".w",
               RandomNormal({layer.out, layer.in}, std::sqrt(2.0 / layer.in), rng));
    params.Add(std::string(layer.name) + ".b", Tensor({layer.out}));
  }
  for (const Layer& layer : DecoderLayers(config)) {
    Tensor weight =
        RandomNormal({layer.out, layer.in}, std::sqrt(2.0 / layer.in), rng);
    Tensor bias({layer.out});
    if (layer.out == 2 * c) {
      // The decoder starts by predicting zero means.
      for (size_t i = 0; i < c; ++i) {
        for (size_t j = 0; j < layer.in; ++j) weight.at(i, j) = 0.0;
      }
      for (size_t i = c; i < 2 * c; ++i) {
        bias[i] = std::log(kInitialScaleSteps * config.delta);
      }
    }
    params.Add(std::string(layer.name) + ".w", std::move(weight));
    params.Add(std::string(layer.name) + ".b", std::move(bias));
  }
  FactorizedDensity(kHyperDensityPrefix, U(config.hyper_channels()))
      .Init(params, kHyperDensityInitScale, rng);
}

Var BuildHyperEncoder(Graph& graph, Var prior, const ModelConfig& config) {
  if (prior.shape().size() != 2 || prior.shape()[0] != U(config.channels)) {
    Fail(ErrorCode::kInvalidArgument, "hyper_encode",
         "prior shape " + ShapeToString(prior.shape()) +
             " does not match C=" + std::to_string(config.channels));
  }
  if (config.channels % 16 != 0) {
    Fail(ErrorCode::kInvalidArgument, "hyper_encode",
         "channel count must be divisible by 16");
  }
  return MixStack(graph, prior, EncoderLayers(config));
}

GaussianVars BuildHyperDecoder(Graph& graph, Var z, const ModelConfig& config) {
  if (z.shape().size() != 2 || z.shape()[0] != U(config.hyper_channels())) {
    Fail(ErrorCode::kInvalidArgument, "hyper_decode",
         "hyperprior shape " + ShapeToString(z.shape()) +
             " does not match C/16=" + std::to_string(config.hyper_channels()));
  }
  const size_t c = U(config.channels);
  Var out = MixStack(graph, z, DecoderLayers(config));
  Var mean = ops::SliceRows(out, 0, c);
  Var scale = ops::ClampMin(ops::Exp(ops::SliceRows(out, c, 2 * c)),
                            config.sigma_min());
  return {mean, scale};
}

Hyperprior HyperEncode(const SemanticPrior& prior, const ParamStore& params,
                       const ModelConfig& config) {
  Graph graph(&params);
  Var z = BuildHyperEncoder(graph, graph.Constant(prior.vectors()), config);
  z = ops::MulConstant(
      z, PresenceMask(prior.presence(), U(config.hyper_channels())));
  Hyperprior out;
  out.latents = graph.value(z);
  out.quantized = RoundToGrid(out.latents, config.delta);
  return out;
}

GaussianParams HyperDecode(const Tensor& z_tilde, const ParamStore& params,
                           const ModelConfig& config) {
  Graph graph(&params);
  GaussianVars gv = BuildHyperDecoder(graph, graph.Constant(z_tilde), config);
  return {graph.value(gv.mean), graph.value(gv.scale)};
}

BitsResult GaussianBits(const Tensor& symbols, const GaussianParams& gp,
                        double step, const std::vector<bool>& presence) {
  if (!symbols.SameShape(gp.mean) || !symbols.SameShape(gp.scale) ||
      symbols.rank() != 2) {
    Fail(ErrorCode::kInvalidArgument, "gaussian_bits",
         "symbols " + ShapeToString(symbols.shape()) +
             " do not match parameters " + ShapeToString(gp.mean.shape()));
  }
  CheckPresence("gaussian_bits", presence, symbols.dim(1));
  Graph graph;
  Tensor values = symbols;
  for (double& v : values.data()) v *= step;
  Var p = ops::GaussianIntervalMass(graph.Constant(values),
                                    graph.Constant(gp.mean),
                                    graph.Constant(gp.scale), step);
  return MaskedBits(graph.value(p),
                    MaskFor(presence, symbols.dim(0), symbols.dim(1)));
}

BitsResult FactorizedBits(const Tensor& symbols, const FactorizedDensity& fd,
                          const ParamStore& params, double step,
                          const std::vector<bool>& presence) {
  if (symbols.rank() != 2 || symbols.dim(0) != fd.channels()) {
    Fail(ErrorCode::kInvalidArgument, "factorized_bits",
         "symbols " + ShapeToString(symbols.shape()) + " do not have " +
             std::to_string(fd.channels()) + " channels");
  }
  CheckPresence("factorized_bits", presence, symbols.dim(1));
  Tensor values = symbols;
  for (double& v : values.data()) v *= step;
  return MaskedBits(fd.Likelihood(params, values, step),
                    MaskFor(presence, symbols.dim(0), symbols.dim(1)));
}

RateVars BuildRate(Graph& graph, Var prior, const std::vector<bool>& presence,
                   const ModelConfig& config, QuantMode mode, Rng* rng) {
  const size_t c = U(config.channels);
  if (prior.shape().size() != 2 || prior.shape()[0] != c ||
      prior.shape()[1] != presence.size()) {
    Fail(ErrorCode::kInvalidArgument, "rate",
         "prior shape " + ShapeToString(prior.shape()) +
             " does not match configuration");
  }
  Require(mode == QuantMode::kTest || rng != nullptr, "rate",
          "train mode needs a generator");
  const double step = config.delta;

  auto quantize = [&](Var v, const Tensor& mask) {
    if (mode == QuantMode::kTest) {
      return graph.Constant(RoundToGrid(graph.value(v), step));
    }
    Tensor noise = UniformNoise(v.shape(), step, *rng);
    for (size_t i = 0; i < noise.size(); ++i) noise[i] *= mask[i];
    return ops::AddConstant(v, noise);
  };
  auto bits = [&](Var p, const Tensor& mask) {
    return ops::Sum(ops::MulConstant(ops::NegLog2(p, kProbabilityFloor), mask));
  };

  const Tensor prior_mask = PresenceMask(presence, c);
  RateVars out;
  if (config.variant == EntropyVariant::kFactorized) {
    out.t_tilde = quantize(prior, prior_mask);
    FactorizedDensity fd(kPriorDensityPrefix, c);
    out.prior_bits = bits(fd.BuildLikelihood(graph, out.t_tilde, step), prior_mask);
    out.total_bits = out.prior_bits;
    return out;
  }

  const Tensor hyper_mask = PresenceMask(presence, U(config.hyper_channels()));
  Var z = ops::MulConstant(BuildHyperEncoder(graph, prior, config), hyper_mask);
  out.z_tilde = quantize(z, hyper_mask);
  GaussianVars gv = BuildHyperDecoder(graph, out.z_tilde, config);
  out.t_tilde = quantize(prior, prior_mask);
  out.prior_bits = bits(
      ops::GaussianIntervalMass(out.t_tilde, gv.mean, gv.scale, step),
      prior_mask);
  FactorizedDensity fd(kHyperDensityPrefix, U(config.hyper_channels()));
  out.hyper_bits = bits(fd.BuildLikelihood(graph, out.z_tilde, step), hyper_mask);
  out.total_bits = ops::Add(out.prior_bits, out.hyper_bits);
  return out;
}

RateResult Rate(const SemanticPrior& prior, const ParamStore& params,
                const ModelConfig& config, QuantMode mode, Rng* rng) {
  Graph graph(&params);
  RateVars rv = BuildRate(graph, graph.Constant(prior.vectors()),
                          prior.presence(), config, mode, rng);
  RateResult out;
  out.t_tilde = graph.value(rv.t_tilde);
  out.prior_bits = graph.value(rv.prior_bits).item();
  if (rv.z_tilde.valid()) {
    out.z_tilde = graph.value(rv.z_tilde);
    out.hyper_bits = graph.value(rv.hyper_bits).item();
  }
  out.total_bits = out.prior_bits + out.hyper_bits;
  return out;
}

}  // namespace spc
