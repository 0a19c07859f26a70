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

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "spc/autodiff.h"
#include "spc/entropy_models.h"
#include "spc/error.h"
#include "spc/model.h"
#include "spc/ops.h"
#include "spc/param_store.h"
#include "spc/rng.h"

namespace spc {
namespace {

double StdNormalCdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

SemanticPrior RandomPrior(size_t c, size_t n, double scale, Rng& rng,
                          std::vector<bool> presence = {}) {
  if (presence.empty()) presence.assign(n, true);
  Tensor vectors({c, n});
  for (size_t i = 0; i < c; ++i) {
    for (size_t j = 0; j < n; ++j) {
      vectors.at(i, j) = presence[j] ? scale * rng.Normal() : 0.0;
    }
  }
  return SemanticPrior(std::move(vectors), std::move(presence));
}

TEST(QuantizeTest, TestModeRoundsToGrid) {
  const Quantizer q{0.01};
  const Tensor out = Quantize(Tensor({2}, {0.0234, -0.005}), q, QuantMode::kTest,
                              nullptr);
  EXPECT_EQ(out[0], 0.02);
  EXPECT_EQ(out[1], -0.01);
  EXPECT_EQ(QuantizeIndex(0.0234, 0.01), 2);
  EXPECT_EQ(QuantizeIndex(-0.005, 0.01), -1);
  EXPECT_EQ(QuantizeIndex(0.005, 0.01), 1);
}

TEST(QuantizeTest, TrainModeNoiseIsBoundedAndUnbiased) {
  Rng rng(17);
  Tensor values({100000});
  for (double& v : values.data()) v = rng.Normal();
  const Tensor noisy = Quantize(values, Quantizer{0.01}, QuantMode::kTrain, &rng);
  double sum = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    const double d = noisy[i] - values[i];
    ASSERT_GT(d, -0.005);
    ASSERT_LT(d, 0.005);
    sum += d;
  }
  EXPECT_LT(std::fabs(sum / values.size()), 1e-4);
}

TEST(HyperEncodeTest, FullSizeShape) {
  const ModelConfig config;
  const Model model = InitModel(config, 5);
  Rng rng(1);
  const Hyperprior h = HyperEncode(RandomPrior(64, 19, 0.05, rng), model.params,
                                   config);
  EXPECT_EQ(h.latents.shape(), (Shape{4, 19}));
  EXPECT_EQ(h.quantized.shape(), (Shape{4, 19}));
  for (size_t i = 0; i < h.quantized.size(); ++i) {
    EXPECT_EQ(h.quantized[i],
              0.01 * static_cast<double>(QuantizeIndex(h.latents[i], 0.01)));
  }
}

TEST(HyperEncodeTest, ZeroPriorZeroBiasGivesZero) {
  const ModelConfig config;
  Model model = InitModel(config, 5);
  for (const char* name : {"hyper.enc1.b", "hyper.enc2.b", "hyper.enc3.b"}) {
    model.params.Mutable(name).Fill(0.0);
  }
  const Hyperprior h = HyperEncode(
      SemanticPrior(Tensor({64, 3}), {true, true, true}), model.params, config);
  for (double v : h.latents.data()) EXPECT_EQ(v, 0.0);
}

TEST(HyperEncodeTest, PermutingColumnsPermutesLatents) {
  const ModelConfig config;
  const Model model = InitModel(config, 5);
  Rng rng(2);
  const SemanticPrior p = RandomPrior(64, 6, 0.1, rng);
  const size_t perm[6] = {3, 0, 5, 1, 4, 2};
  Tensor permuted({64, 6});
  for (size_t c = 0; c < 64; ++c) {
    for (size_t n = 0; n < 6; ++n) permuted.at(c, n) = p.at(c, perm[n]);
  }
  const Hyperprior a = HyperEncode(p, model.params, config);
  const Hyperprior b = HyperEncode(SemanticPrior(permuted, p.presence()),
                                   model.params, config);
  for (size_t g = 0; g < 4; ++g) {
    for (size_t n = 0; n < 6; ++n) {
      EXPECT_EQ(b.latents.at(g, n), a.latents.at(g, perm[n]));
    }
  }
}

TEST(HyperEncodeTest, AbsentColumnsAreZero) {
  const ModelConfig config;
  const Model model = InitModel(config, 5);
  Rng rng(2);
  const SemanticPrior p = RandomPrior(64, 4, 0.1, rng, {true, false, true, false});
  const Hyperprior h = HyperEncode(p, model.params, config);
  for (size_t g = 0; g < 4; ++g) {
    EXPECT_EQ(h.latents.at(g, 1), 0.0);
    EXPECT_EQ(h.latents.at(g, 3), 0.0);
  }
}

TEST(HyperEncodeTest, ChannelsNotDivisibleBySixteenIsError) {
  ModelConfig config;
  const Model model = InitModel(config, 5);
  config.channels = 24;
  EXPECT_THROW(HyperEncode(SemanticPrior(Tensor({24, 2}), {true, true}),
                           model.params, config),
               Error);
}

TEST(HyperDecodeTest, ShapesAndScaleFloor) {
  const ModelConfig config;
  Model model = InitModel(config, 5);
  // Push every scale logit far below log(sigma_min).
  model.params.Mutable("hyper.dec3.b").Fill(-30.0);
  Rng rng(3);
  Tensor z({4, 7});
  for (double& v : z.data()) v = rng.Normal();
  const GaussianParams gp = HyperDecode(z, model.params, config);
  EXPECT_EQ(gp.mean.shape(), (Shape{64, 7}));
  EXPECT_EQ(gp.scale.shape(), (Shape{64, 7}));
  for (double s : gp.scale.data()) EXPECT_GE(s, 0.001);
  EXPECT_THROW(HyperDecode(Tensor({3, 7}), model.params, config), Error);
}

TEST(HyperDecodeTest, ColumnsAreIndependent) {
  const ModelConfig config;
  Model model = InitModel(config, 5);
  Rng rng(4);
  for (const std::string& name : model.params.Names()) {
    if (name.rfind("hyper.dec", 0) == 0) {
      for (double& v : model.params.Mutable(name).data()) v += 0.1 * rng.Normal();
    }
  }
  Tensor z({4, 5});
  for (double& v : z.data()) v = rng.Normal();
  const GaussianParams before = HyperDecode(z, model.params, config);
  for (size_t g = 0; g < 4; ++g) z.at(g, 2) += 1.0;
  const GaussianParams after = HyperDecode(z, model.params, config);
  bool column_changed = false;
  for (size_t c = 0; c < 64; ++c) {
    for (size_t n = 0; n < 5; ++n) {
      if (n == 2) {
        column_changed = column_changed ||
                         before.mean.at(c, n) != after.mean.at(c, n) ||
                         before.scale.at(c, n) != after.scale.at(c, n);
      } else {
        EXPECT_EQ(before.mean.at(c, n), after.mean.at(c, n));
        EXPECT_EQ(before.scale.at(c, n), after.scale.at(c, n));
      }
    }
  }
  EXPECT_TRUE(column_changed);
}

TEST(GaussianBitsTest, StandardNormalCentralBin) {
  const GaussianParams gp{Tensor({1, 1}, 0.0), Tensor({1, 1}, 1.0)};
  const BitsResult r = GaussianBits(Tensor({1, 1}, 0.0), gp, 1.0);
  const double p = StdNormalCdf(0.5) - StdNormalCdf(-0.5);
  EXPECT_NEAR(p, 0.38292, 5e-6);
  EXPECT_NEAR(r.probabilities[0], p, 1e-12);
  EXPECT_NEAR(r.total_bits, 1.3848, 1e-4);
  EXPECT_NEAR(r.total_bits, -std::log2(p), 1e-12);
}

TEST(GaussianBitsTest, SymmetricAboutZeroMean) {
  const size_t k = 41;
  Tensor symbols({1, k}), mirrored({1, k});
  for (size_t i = 0; i < k; ++i) {
    symbols[i] = static_cast<double>(i) - 20.0;
    mirrored[i] = -symbols[i];
  }
  const GaussianParams gp{Tensor({1, k}, 0.0), Tensor({1, k}, 3.7)};
  const BitsResult a = GaussianBits(symbols, gp, 0.5);
  const BitsResult b = GaussianBits(mirrored, gp, 0.5);
  for (size_t i = 0; i < k; ++i) {
    EXPECT_NEAR(a.probabilities[i], b.probabilities[i], 1e-12);
  }
}

TEST(GaussianBitsTest, MassesSumToOne) {
  const size_t k = 2000001;
  Tensor symbols({1, k});
  for (size_t i = 0; i < k; ++i) symbols[i] = static_cast<double>(i) - 1e6;
  for (const auto& [mu, sigma, step] :
       std::vector<std::tuple<double, double, double>>{
           {0.0, 1.0, 1.0}, {0.37, 2.5, 0.01}, {-4.0, 0.001, 0.01}}) {
    const GaussianParams gp{Tensor({1, k}, mu), Tensor({1, k}, sigma)};
    const BitsResult r = GaussianBits(symbols, gp, step);
    // Bins at the floor carry less than 2^-40 of true mass each.
    double sum = 0.0;
    for (double p : r.probabilities.data()) {
      if (p > kProbabilityFloor) sum += p;
    }
    EXPECT_GE(sum, 1.0 - 1e-9) << mu << " " << sigma;
    EXPECT_LE(sum, 1.0 + 1e-12) << mu << " " << sigma;
  }
}

TEST(GaussianBitsTest, FloorKeepsFarTailFinite) {
  const GaussianParams gp{Tensor({1, 1}, 0.0), Tensor({1, 1}, 0.001)};
  const BitsResult r = GaussianBits(Tensor({1, 1}, 1e6), gp, 0.01);
  EXPECT_EQ(r.probabilities[0], kProbabilityFloor);
  EXPECT_NEAR(r.total_bits, 40.0, 1e-9);
}

TEST(GaussianBitsTest, MovingTowardMeanNeverCostsMore) {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const double mu = rng.Uniform(-0.2, 0.2);
    const double sigma = rng.Uniform(0.001, 0.1);
    const int64_t center = QuantizeIndex(mu, 0.01);
    int64_t q = center + static_cast<int64_t>(rng.UniformInt(41)) - 20;
    const GaussianParams gp{Tensor({1, 1}, mu), Tensor({1, 1}, sigma)};
    double previous = GaussianBits(Tensor({1, 1}, double(q)), gp, 0.01).total_bits;
    while (q != center) {
      q += q < center ? 1 : -1;
      const double bits =
          GaussianBits(Tensor({1, 1}, double(q)), gp, 0.01).total_bits;
      ASSERT_LE(bits, previous + 1e-12);
      previous = bits;
    }
  }
}

TEST(GaussianBitsTest, AbsentColumnsCostNothing) {
  const GaussianParams gp{Tensor({2, 3}, 0.0), Tensor({2, 3}, 0.02)};
  const Tensor symbols({2, 3}, {1, 5, -2, 0, 9, 3});
  const BitsResult masked = GaussianBits(symbols, gp, 0.01, {true, false, true});
  EXPECT_EQ(masked.probabilities.at(0, 1), 1.0);
  EXPECT_EQ(masked.probabilities.at(1, 1), 1.0);
  const BitsResult all = GaussianBits(symbols, gp, 0.01);
  double expected = 0.0;
  for (size_t c = 0; c < 2; ++c) {
    for (size_t n : {0, 2}) expected += -std::log2(all.probabilities.at(c, n));
  }
  EXPECT_NEAR(masked.total_bits, expected, 1e-12);
}

TEST(TrainModeRateTest, NoisyBitsTrackRoundedBits) {
  Rng rng(10);
  const double step = 0.01;
  for (double sigma_steps : {5.0, 8.0, 20.0}) {
    for (int q : {0, 1, 3, -6}) {
      const double v = q * step;
      const size_t draws = 10000;
      Tensor noisy({1, draws});
      for (double& x : noisy.data()) x = v + rng.Uniform(-0.5, 0.5) * step;
      Graph g;
      Var p = ops::GaussianIntervalMass(
          g.Constant(noisy), g.Constant(Tensor({1, draws}, 0.0)),
          g.Constant(Tensor({1, draws}, sigma_steps * step)), step);
      const double train =
          g.value(ops::Sum(ops::NegLog2(p, kProbabilityFloor))).item() / draws;
      const GaussianParams gp{Tensor({1, 1}, 0.0),
                              Tensor({1, 1}, sigma_steps * step)};
      const double test = GaussianBits(Tensor({1, 1}, double(q)), gp, step).total_bits;
      EXPECT_NEAR(train, test, 0.02 * test) << sigma_steps << " " << q;
    }
  }
}

TEST(FactorizedDensityTest, FreshCdfIsMonotoneWithLimits) {
  ParamStore params;
  Rng rng(3);
  const FactorizedDensity fd("fd", 4);
  fd.Init(params, 1.0, rng);
  const size_t m = 10000;
  Tensor grid({4, m});
  for (size_t g = 0; g < 4; ++g) {
    for (size_t i = 0; i < m; ++i) grid.at(g, i) = -50.0 + 100.0 * i / (m - 1);
  }
  const Tensor cdf = fd.Cdf(params, grid);
  for (size_t g = 0; g < 4; ++g) {
    for (size_t i = 1; i < m; ++i) ASSERT_GE(cdf.at(g, i), cdf.at(g, i - 1));
  }
  const double delta = 0.01;
  const Tensor tails = fd.Cdf(
      params, Tensor({4, 2}, {-1e4 * delta, 1e4 * delta, -1e4 * delta,
                              1e4 * delta, -1e4 * delta, 1e4 * delta,
                              -1e4 * delta, 1e4 * delta}));
  for (size_t g = 0; g < 4; ++g) {
    EXPECT_LE(tails.at(g, 0), 1e-6);
    EXPECT_GE(tails.at(g, 1), 1.0 - 1e-6);
  }
}

TEST(FactorizedDensityTest, LikelihoodIsNonNegative) {
  ParamStore params;
  Rng rng(3);
  const FactorizedDensity fd("fd", 2);
  fd.Init(params, 0.25, rng);
  Tensor symbols({2, 201});
  for (size_t g = 0; g < 2; ++g) {
    for (size_t i = 0; i < 201; ++i) symbols.at(g, i) = double(i) - 100.0;
  }
  const BitsResult r = FactorizedBits(symbols, fd, params, 0.01);
  for (double p : r.probabilities.data()) {
    EXPECT_GT(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
  EXPECT_TRUE(std::isfinite(r.total_bits));
}

// Entropy of N(0, 1) discretized on a grid of width `step`.
double DiscretizedGaussianEntropy(double step) {
  const int64_t half = static_cast<int64_t>(std::ceil(12.0 / step));
  Tensor symbols({1, static_cast<size_t>(2 * half + 1)});
  for (int64_t q = -half; q <= half; ++q) symbols[size_t(q + half)] = double(q);
  const GaussianParams gp{Tensor(symbols.shape(), 0.0), Tensor(symbols.shape(), 1.0)};
  const BitsResult r = GaussianBits(symbols, gp, step);
  double h = 0.0;
  for (double p : r.probabilities.data()) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

TEST(FactorizedDensityTest, LearnsGaussianEntropy) {
  const double step = 0.01;
  ParamStore params;
  Rng rng(12);
  const FactorizedDensity fd("fd", 1);
  fd.Init(params, 1.0, rng);
  AdamOptions adam;
  adam.lr = 1e-2;
  const size_t batch = 256;
  for (int it = 0; it < 1500; ++it) {
    Tensor noisy({1, batch});
    for (double& v : noisy.data()) v = rng.Normal() + rng.Uniform(-0.5, 0.5) * step;
    const LossAndGrads lg = ForwardBackward(params, [&](Graph& g) {
      Var p = fd.BuildLikelihood(g, g.Constant(noisy), step);
      return ops::Scale(ops::Sum(ops::NegLog2(p, kProbabilityFloor)),
                        1.0 / batch);
    });
    AdamStep(params, lg.grads, adam);
  }
  const size_t n = 10000;
  Tensor symbols({1, n});
  for (double& v : symbols.data()) {
    v = static_cast<double>(QuantizeIndex(rng.Normal(), step));
  }
  const double model_bits = FactorizedBits(symbols, fd, params, step).total_bits / n;
  const double entropy = DiscretizedGaussianEntropy(step);
  EXPECT_NEAR(model_bits, entropy, 0.05 * entropy)
      << "model " << model_bits << " entropy " << entropy;
}

TEST(RateTest, TotalIsPriorPlusHyper) {
  const ModelConfig config;
  const Model model = InitModel(config, 5);
  Rng rng(6);
  const SemanticPrior p = RandomPrior(64, 19, 0.05, rng);
  for (QuantMode mode : {QuantMode::kTest, QuantMode::kTrain}) {
    const RateResult r = Rate(p, model.params, config, mode, &rng);
    EXPECT_EQ(r.total_bits, r.prior_bits + r.hyper_bits);
    EXPECT_GT(r.hyper_bits, 0.0);
  }
}

TEST(RateTest, AbsentClassesCostNothing) {
  const ModelConfig config;
  const Model model = InitModel(config, 5);
  const SemanticPrior p(Tensor({64, 19}), std::vector<bool>(19, false));
  const RateResult r = Rate(p, model.params, config, QuantMode::kTest, nullptr);
  EXPECT_EQ(r.total_bits, 0.0);
}

TEST(RateTest, RegionsAreLocal) {
  for (EntropyVariant variant :
       {EntropyVariant::kHyperprior, EntropyVariant::kFactorized}) {
    ModelConfig config;
    config.variant = variant;
    const Model model = InitModel(config, 5);
    Rng rng(7);
    const size_t n = 6;
    const SemanticPrior p = RandomPrior(64, n, 0.05, rng);
    const double total =
        Rate(p, model.params, config, QuantMode::kTest, nullptr).total_bits;
    double sum = 0.0;
    for (size_t j = 0; j < n; ++j) {
      std::vector<bool> only(n, false);
      only[j] = true;
      Tensor column({64, n});
      for (size_t c = 0; c < 64; ++c) column.at(c, j) = p.at(c, j);
      sum += Rate(SemanticPrior(column, only), model.params, config,
                  QuantMode::kTest, nullptr)
                 .total_bits;
    }
    EXPECT_NEAR(sum, total, 1e-9 * total) << VariantName(variant);
  }
}

TEST(RateTest, TestModeIsDeterministic) {
  const ModelConfig config;
  const Model model = InitModel(config, 5);
  Rng rng(9);
  const SemanticPrior p = RandomPrior(64, 19, 0.05, rng);
  const RateResult a = Rate(p, model.params, config, QuantMode::kTest, nullptr);
  const RateResult b = Rate(p, model.params, config, QuantMode::kTest, nullptr);
  EXPECT_EQ(a.total_bits, b.total_bits);
  EXPECT_EQ(a.t_tilde, b.t_tilde);
  EXPECT_EQ(a.z_tilde, b.z_tilde);
}

}  // namespace
}  // namespace spc
