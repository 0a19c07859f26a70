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

#include "spc/gradcheck.h"

#include <algorithm>
#include <cmath>

#include "spc/entropy_models.h"
#include "spc/model.h"
#include "spc/ops.h"
#include "spc/semantic_prior.h"
#include "spc/trainer.h"

namespace spc {
namespace {

constexpr double kErrorFloor = 1e-6;
constexpr int kMaxRedraws = 50;

Tensor Random(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(shape);
  for (double& v : t.data()) v = rng.Uniform(lo, hi);
  return t;
}

std::vector<uint8_t> RandomLabels(size_t count, size_t classes, Rng& rng) {
  std::vector<uint8_t> labels(count);
  for (uint8_t& l : labels) l = static_cast<uint8_t>(rng.UniformInt(classes));
  return labels;
}

// Contracts a tensor-valued output with fixed random weights.
Var Contract(Graph& graph, Var out, const Tensor& weights) {
  return ops::Sum(ops::Mul(out, graph.Constant(weights)));
}

struct Evaluation {
  double loss;
  uint64_t signature;
};

Evaluation Evaluate(const GradProblem& problem) {
  Graph graph(&problem.params);
  Var loss = problem.build(graph);
  return {graph.value(loss).item(), graph.branch_signature()};
}

// Suite over named random inputs whose output is contracted to a scalar.
GradSuite Unary(std::string name, std::vector<Shape> shapes,
                std::function<Var(const std::vector<Var>&)> op,
                double lo = -1.0, double hi = 1.0) {
  GradSuite suite;
  suite.name = std::move(name);
  suite.make = [shapes, op, lo, hi](Rng& rng) {
    GradProblem p;
    std::vector<std::string> names;
    for (size_t i = 0; i < shapes.size(); ++i) {
      names.push_back(std::string(1, static_cast<char>('a' + i)));
      p.params.Add(names.back(), Random(shapes[i], rng, lo, hi));
    }
    Graph probe(&p.params);
    std::vector<Var> inputs;
    for (const std::string& n : names) inputs.push_back(probe.Param(n));
    const Shape out_shape = op(inputs).shape();
    const Tensor weights = Random(out_shape, rng);
    p.build = [names, op, weights](Graph& graph) {
      std::vector<Var> vars;
      for (const std::string& n : names) vars.push_back(graph.Param(n));
      return Contract(graph, op(vars), weights);
    };
    return p;
  };
  return suite;
}

ModelConfig SmallConfig() {
  ModelConfig config;
  config.channels = 16;
  config.num_classes = 4;
  config.texnet_hidden = 4;
  config.synnet_hidden = 6;
  return config;
}

SemanticMap RandomBlockMap(size_t w, size_t h, size_t classes, Rng& rng) {
  std::vector<uint8_t> labels(w * h);
  const size_t block = 4;
  std::vector<uint8_t> block_labels = RandomLabels(
      ((w + block - 1) / block) * ((h + block - 1) / block), classes, rng);
  const size_t bw = (w + block - 1) / block;
  for (size_t y = 0; y < h; ++y) {
    for (size_t x = 0; x < w; ++x) {
      labels[y * w + x] = block_labels[(y / block) * bw + x / block];
    }
  }
  labels[0] = 0;
  return SemanticMap(w, h, classes, std::move(labels));
}

// Perturbs a fresh model's parameters so that biases and zero-initialized
// factors are not at special points.
Model JitteredModel(const ModelConfig& config, Rng& rng,
                    double magnitude = 0.05) {
  Model model = InitModel(config, rng.NextU64());
  for (const std::string& name : model.params.Names()) {
    for (double& v : model.params.Mutable(name).data()) {
      v += magnitude * rng.Uniform(-1.0, 1.0);
    }
  }
  return model;
}

}  // namespace

double GradientError(double analytic, double numeric) {
  const double scale =
      std::max({std::abs(analytic), std::abs(numeric), kErrorFloor});
  return std::abs(analytic - numeric) / scale;
}

double GradientError(std::span<const double> analytic,
                     std::span<const double> numeric) {
  double diff = 0.0, scale = kErrorFloor;
  for (size_t i = 0; i < analytic.size(); ++i) {
    diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
    scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric[i])});
  }
  return diff / scale;
}

GradCheckResult CheckGradients(const GradSuite& suite, uint64_t seed,
                               int points, int coords_per_tensor, double step) {
  GradCheckResult result;
  result.name = suite.name;
  Rng rng(seed);
  for (int point = 0; point < points; ++point) {
    GradProblem problem = suite.make(rng);
    const LossAndGrads lg = ForwardBackward(problem.params, problem.build);
    const uint64_t base_signature = Evaluate(problem).signature;
    ++result.points;
    std::vector<double> point_analytic, point_numeric;
    for (const std::string& name : problem.params.Names()) {
      const size_t size = problem.params.Get(name).size();
      const size_t wanted =
          std::min<size_t>(size, static_cast<size_t>(coords_per_tensor));
      std::vector<double> analytic, numeric;
      for (size_t k = 0; k < wanted; ++k) {
        for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
          const size_t i =
              size <= static_cast<size_t>(coords_per_tensor) ? k : rng.UniformInt(size);
          double& x = problem.params.Mutable(name)[i];
          const double saved = x;
          x = saved + step;
          const Evaluation plus = Evaluate(problem);
          x = saved - step;
          const Evaluation minus = Evaluate(problem);
          x = saved;
          if (plus.signature != base_signature ||
              minus.signature != base_signature) {
            ++result.kinks;
            if (size <= static_cast<size_t>(coords_per_tensor)) break;
            continue;
          }
          numeric.push_back((plus.loss - minus.loss) / (2 * step));
          analytic.push_back(lg.grads.at(name)[i]);
          ++result.coordinates;
          break;
        }
      }
      if (analytic.empty()) continue;
      result.max_tensor_error =
          std::max(result.max_tensor_error, GradientError(analytic, numeric));
      for (size_t k = 0; k < analytic.size(); ++k) {
        result.max_elementwise_error = std::max(
            result.max_elementwise_error, GradientError(analytic[k], numeric[k]));
      }
      point_analytic.insert(point_analytic.end(), analytic.begin(), analytic.end());
      point_numeric.insert(point_numeric.end(), numeric.begin(), numeric.end());
    }
    if (!point_analytic.empty()) {
      result.max_error = std::max(result.max_error,
                                  GradientError(point_analytic, point_numeric));
    }
  }
  result.passed = result.coordinates > 0 &&
                  result.max_error <= kGradCheckTolerance;
  return result;
}

std::vector<GradSuite> OperatorSuites() {
  using V = std::vector<Var>;
  std::vector<GradSuite> s;
  s.push_back(Unary("add", {{2, 3}, {2, 3}}, [](const V& v) {
    return ops::Add(v[0], v[1]);
  }));
  s.push_back(Unary("sub", {{2, 3}, {2, 3}}, [](const V& v) {
    return ops::Sub(v[0], v[1]);
  }));
  s.push_back(Unary("mul", {{2, 3}, {2, 3}}, [](const V& v) {
    return ops::Mul(v[0], v[1]);
  }));
  s.push_back(Unary("scale", {{4}}, [](const V& v) {
    return ops::Scale(v[0], -2.5);
  }));
  s.push_back(Unary("add_constant", {{3, 2}}, [](const V& v) {
    Tensor c({3, 2});
    for (size_t i = 0; i < c.size(); ++i) c[i] = 0.1 * static_cast<double>(i);
    return ops::AddConstant(v[0], c);
  }));
  s.push_back(Unary("mul_constant", {{3, 2}}, [](const V& v) {
    Tensor c({3, 2});
    for (size_t i = 0; i < c.size(); ++i) c[i] = 1.0 - 0.3 * static_cast<double>(i);
    return ops::MulConstant(v[0], c);
  }));
  s.push_back(Unary("sum", {{3, 4}}, [](const V& v) { return ops::Sum(v[0]); }));
  s.push_back(Unary("mean", {{3, 4}}, [](const V& v) { return ops::Mean(v[0]); }));
  s.push_back(Unary("mean_squared_error", {{2, 3, 3}}, [](const V& v) {
    Tensor target({2, 3, 3});
    for (size_t i = 0; i < target.size(); ++i) target[i] = std::sin(1.0 + i);
    return ops::MeanSquaredError(v[0], target);
  }));
  s.push_back(Unary("reshape", {{2, 6}}, [](const V& v) {
    return ops::Reshape(v[0], {3, 4});
  }));
  s.push_back(Unary("slice_rows", {{5, 3}}, [](const V& v) {
    return ops::SliceRows(v[0], 1, 4);
  }));
  s.push_back(Unary("matmul", {{3, 4}, {4, 5}}, [](const V& v) {
    return ops::MatMul(v[0], v[1]);
  }));
  s.push_back(Unary("add_bias", {{3, 2, 4}, {3}}, [](const V& v) {
    return ops::AddBias(v[0], v[1]);
  }));
  s.push_back(Unary("batched_affine", {{2, 3, 4}, {2, 3}, {2, 4, 5}},
                    [](const V& v) {
                      return ops::BatchedAffine(v[0], v[1], v[2]);
                    }));
  s.push_back(Unary("conv3x3", {{2, 5, 6}, {3, 2, 3, 3}}, [](const V& v) {
    return ops::Conv3x3(v[0], v[1]);
  }));
  s.push_back(Unary("relu", {{4, 5}}, [](const V& v) { return ops::Relu(v[0]); },
                    -2.0, 2.0));
  s.push_back(Unary("exp", {{4, 5}}, [](const V& v) { return ops::Exp(v[0]); },
                    -2.0, 2.0));
  s.push_back(Unary("softplus", {{4, 5}},
                    [](const V& v) { return ops::Softplus(v[0]); }, -3.0, 3.0));
  s.push_back(Unary("tanh", {{4, 5}}, [](const V& v) { return ops::Tanh(v[0]); },
                    -2.0, 2.0));
  s.push_back(Unary("clamp_min", {{4, 5}},
                    [](const V& v) { return ops::ClampMin(v[0], 0.1); }, -1.0,
                    1.0));
  s.push_back(Unary("tanh_gate", {{2, 3, 4}, {2, 3}}, [](const V& v) {
    return ops::TanhGate(v[0], v[1]);
  }));
  const std::vector<uint8_t> labels = {0, 0, 1, 1, 2, 0, 1, 3, 3, 0, 2, 2,
                                       1, 0, 0, 3, 2, 2, 1, 1};
  s.push_back(Unary("region_mean", {{3, 4, 5}}, [labels](const V& v) {
    return ops::RegionMean(v[0], labels, 5);
  }));
  s.push_back(Unary("region_broadcast", {{3, 5}}, [labels](const V& v) {
    return ops::RegionBroadcast(v[0], labels, 4, 5);
  }));
  s.push_back(Unary("region_patch_mean", {{2, 4, 5}}, [labels](const V& v) {
    return ops::RegionPatchMean(v[0], labels, 4);
  }));
  // Inputs are mapped into the operator's domain inside the builder.
  s.push_back(Unary("gaussian_interval_mass", {{3, 4}, {3, 4}, {3, 4}},
                    [](const V& v) {
                      Var value = ops::Scale(v[0], 3.0);
                      Var sigma = ops::AddConstant(
                          ops::Scale(v[2], 0.7), Tensor({3, 4}, 1.2));
                      return ops::GaussianIntervalMass(value, v[1], sigma, 1.0);
                    }));
  s.push_back(Unary("logistic_interval_mass", {{3, 4}, {3, 4}}, [](const V& v) {
    Var lower = ops::Scale(v[0], 4.0);
    Var upper = ops::Add(lower, ops::AddConstant(ops::Scale(v[1], 0.4),
                                                  Tensor({3, 4}, 0.6)));
    return ops::LogisticIntervalMass(lower, upper);
  }));
  s.push_back(Unary("neg_log2", {{4, 5}},
                    [](const V& v) { return ops::NegLog2(v[0], 1e-3); }, 0.2,
                    1.0));
  return s;
}

std::vector<GradSuite> NetworkSuites() {
  std::vector<GradSuite> s;
  s.push_back({"mixing_network", [](Rng& rng) {
                 GradProblem p;
                 const size_t widths[] = {6, 5, 4, 3};
                 for (int l = 0; l < 3; ++l) {
                   p.params.Add("w" + std::to_string(l),
                                Random({widths[l + 1], widths[l]}, rng));
                   p.params.Add("b" + std::to_string(l),
                                Random({widths[l + 1]}, rng, -0.2, 0.2));
                 }
                 const Tensor x = Random({6, 7}, rng);
                 const Tensor r = Random({3, 7}, rng);
                 p.build = [x, r](Graph& g) {
                   Var h = g.Constant(x);
                   for (int l = 0; l < 3; ++l) {
                     h = ops::AddBias(ops::MatMul(g.Param("w" + std::to_string(l)), h),
                                      g.Param("b" + std::to_string(l)));
                     if (l < 2) h = ops::Relu(h);
                   }
                   return Contract(g, h, r);
                 };
                 return p;
               }});
  s.push_back({"texnet_prior", [](Rng& rng) {
                 const ModelConfig config = SmallConfig();
                 GradProblem p;
                 p.params = JitteredModel(config, rng).params;
                 Image image(8, 8);
                 for (double& v : image.planes().data()) v = rng.Uniform();
                 const SemanticMap map = RandomBlockMap(8, 8, 4, rng);
                 const Tensor r = Random({16, 4}, rng);
                 p.build = [config, image, map, r](Graph& g) {
                   return Contract(
                       g, BuildPrior(g, g.Constant(image.planes()), map, config), r);
                 };
                 return p;
               }});
  s.push_back({"synnet", [](Rng& rng) {
                 const ModelConfig config = SmallConfig();
                 GradProblem p;
                 p.params = JitteredModel(config, rng).params;
                 const SemanticMap map = RandomBlockMap(8, 8, 4, rng);
                 const Tensor prior = Random({16, 4}, rng);
                 const Tensor r = Random({3, 8, 8}, rng);
                 p.build = [config, map, prior, r](Graph& g) {
                   return Contract(
                       g, BuildSynthesis(g, g.Constant(prior), map, config), r);
                 };
                 return p;
               }});
  s.push_back({"factorized_density", [](Rng& rng) {
                 GradProblem p;
                 FactorizedDensity fd("density", 3);
                 fd.Init(p.params, 1.0, rng);
                 for (const std::string& name : p.params.Names()) {
                   for (double& v : p.params.Mutable(name).data()) {
                     v += 0.1 * rng.Uniform(-1.0, 1.0);
                   }
                 }
                 const Tensor values = Random({3, 5}, rng, -2.0, 2.0);
                 p.build = [fd, values](Graph& g) {
                   return ops::Sum(ops::NegLog2(
                       fd.BuildLikelihood(g, g.Constant(values), 0.5),
                       kProbabilityFloor));
                 };
                 return p;
               }});
  s.push_back({"hyperprior_rate", [](Rng& rng) {
                 ModelConfig config;
                 config.num_classes = 4;
                 GradProblem p;
                 p.params = JitteredModel(config, rng, 0.01).params;
                 std::vector<bool> presence = {true, true, false, true};
                 Tensor prior = Random({64, 4}, rng, -0.1, 0.1);
                 for (size_t c = 0; c < 64; ++c) prior.at(c, 2) = 0.0;
                 const uint64_t noise_seed = rng.NextU64();
                 p.build = [config, presence, prior, noise_seed](Graph& g) {
                   Rng noise(noise_seed);
                   return BuildRate(g, g.Constant(prior), presence, config,
                                    QuantMode::kTrain, &noise)
                       .total_bits;
                 };
                 return p;
               }});
  s.push_back({"rd_loss", [](Rng& rng) {
                 ModelConfig config;
                 config.num_classes = 6;
                 GradProblem p;
                 p.params = JitteredModel(config, rng, 0.01).params;
                 Image image(16, 16);
                 for (double& v : image.planes().data()) v = rng.Uniform();
                 const SemanticMap map = RandomBlockMap(16, 16, 6, rng);
                 const uint64_t noise_seed = rng.NextU64();
                 p.build = [config, image, map, noise_seed](Graph& g) {
                   Rng noise(noise_seed);
                   return BuildRdLoss(g, image, map, config, 1e-3,
                                      QuantMode::kTrain, &noise)
                       .loss;
                 };
                 return p;
               }});
  return s;
}

std::vector<GradCheckResult> RunGradientSuites(uint64_t seed, int points) {
  std::vector<GradCheckResult> results;
  Rng rng(seed);
  for (const std::vector<GradSuite>& group : {OperatorSuites(), NetworkSuites()}) {
    for (const GradSuite& suite : group) {
      results.push_back(CheckGradients(suite, rng.NextU64(), points));
    }
  }
  return results;
}

}  // namespace spc
