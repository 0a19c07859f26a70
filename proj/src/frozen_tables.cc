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

#include "spc/frozen_tables.h"

#include <algorithm>
#include <cmath>

#include "spc/error.h"

namespace spc {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kTailMass = 1e-9;
constexpr int64_t kMaxFactorizedAlphabet = 16384;
constexpr int64_t kSearchLimit = int64_t{1} << 24;

// Mass of [x - 1/2, x + 1/2) under N(0, s^2), all in step units.
double UnitIntervalMass(double x, double s) {
  const double upper = (x + 0.5) / s;
  const double lower = (x - 0.5) / s;
  if (x > 0.0) {
    return 0.5 * (std::erfc(lower * kInvSqrt2) - std::erfc(upper * kInvSqrt2));
  }
  return 0.5 * (std::erfc(-upper * kInvSqrt2) - std::erfc(-lower * kInvSqrt2));
}

int64_t FloorDiv(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

double ScaleGridSteps(int index) {
  const double ratio = kMaxScaleSteps / kMinScaleSteps;
  return kMinScaleSteps *
         std::pow(ratio, static_cast<double>(index) / (kNumScales - 1));
}

int SnapScaleIndex(double scale, double step) {
  const double ratio = kMaxScaleSteps / kMinScaleSteps;
  const double t =
      std::log(scale / step / kMinScaleSteps) / std::log(ratio) * (kNumScales - 1);
  if (!(t > 0.0)) return 0;
  return static_cast<int>(std::min<double>(kNumScales - 1, std::round(t)));
}

int64_t SnapMeanSubsteps(double mean, double step) {
  return static_cast<int64_t>(std::llround(mean / step * kMeanSubsteps));
}

GaussianTableBank::GaussianTableBank(double step) : step_(step) {
  Require(step > 0.0, "freeze_gaussian_tables", "step must be positive");
}

const CdfTable& GaussianTableBank::Table(int mean_fraction, int scale_index) {
  const size_t key =
      static_cast<size_t>(mean_fraction) * kNumScales + scale_index;
  std::unique_ptr<CdfTable>& slot = tables_[key];
  if (slot) return *slot;
  const double s = ScaleGridSteps(scale_index);
  const double mu = static_cast<double>(mean_fraction) / kMeanSubsteps;
  const int64_t lo = static_cast<int64_t>(std::floor(mu - kTableRadiusScales * s));
  const int64_t hi = static_cast<int64_t>(std::ceil(mu + kTableRadiusScales * s));
  std::vector<double> probabilities;
  probabilities.reserve(static_cast<size_t>(hi - lo + 1));
  double covered = 0.0;
  for (int64_t q = lo; q <= hi; ++q) {
    const double p = UnitIntervalMass(static_cast<double>(q) - mu, s);
    probabilities.push_back(p);
    covered += p;
  }
  const double escape = std::max(1.0 - covered, kTailMass);
  slot = std::make_unique<CdfTable>(
      CdfTable::Build(static_cast<int32_t>(lo), probabilities, escape));
  return *slot;
}

FrozenGaussian GaussianTableBank::Freeze(double mean, double scale) {
  const int64_t m = SnapMeanSubsteps(mean, step_);
  const int64_t whole = FloorDiv(m, kMeanSubsteps);
  const int fraction = static_cast<int>(m - whole * kMeanSubsteps);
  const int k = SnapScaleIndex(scale, step_);
  FrozenGaussian frozen;
  frozen.offset = whole;
  frozen.table = &Table(fraction, k);
  frozen.mean = static_cast<double>(m) / kMeanSubsteps * step_;
  frozen.scale = ScaleGridSteps(k) * step_;
  frozen.scale_index = k;
  return frozen;
}

GaussianParams SnapGaussianParams(const GaussianParams& gp, double step) {
  GaussianParams out = gp;
  for (size_t i = 0; i < gp.mean.size(); ++i) {
    out.mean[i] =
        static_cast<double>(SnapMeanSubsteps(gp.mean[i], step)) / kMeanSubsteps * step;
    out.scale[i] = ScaleGridSteps(SnapScaleIndex(gp.scale[i], step)) * step;
  }
  return out;
}

std::vector<CdfTable> FreezeFactorizedTables(const FactorizedDensity& fd,
                                             const ParamStore& params,
                                             double step) {
  const size_t g = fd.channels();
  auto cdf_at = [&](const std::vector<double>& xs) {
    Tensor x({g, 1});
    for (size_t c = 0; c < g; ++c) x[c] = xs[c];
    return fd.Cdf(params, x);
  };
  // Per-channel bisection for the first symbol whose upper edge carries more
  // than the tail mass, and the last whose lower edge leaves more than it.
  std::vector<int64_t> lo_a(g, -kSearchLimit), lo_b(g, kSearchLimit);
  std::vector<int64_t> hi_a(g, -kSearchLimit), hi_b(g, kSearchLimit);
  std::vector<double> xs(g);
  while (true) {
    bool done = true;
    for (size_t c = 0; c < g; ++c) {
      done = done && lo_b[c] - lo_a[c] <= 1 && hi_b[c] - hi_a[c] <= 1;
    }
    if (done) break;
    for (size_t c = 0; c < g; ++c) {
      xs[c] = step * (static_cast<double>((lo_a[c] + lo_b[c]) / 2) + 0.5);
    }
    const Tensor lower_cdf = cdf_at(xs);
    for (size_t c = 0; c < g; ++c) {
      xs[c] = step * (static_cast<double>((hi_a[c] + hi_b[c]) / 2) - 0.5);
    }
    const Tensor upper_cdf = cdf_at(xs);
    for (size_t c = 0; c < g; ++c) {
      if (lo_b[c] - lo_a[c] > 1) {
        const int64_t mid = (lo_a[c] + lo_b[c]) / 2;
        (lower_cdf[c] > kTailMass ? lo_b[c] : lo_a[c]) = mid;
      }
      if (hi_b[c] - hi_a[c] > 1) {
        const int64_t mid = (hi_a[c] + hi_b[c]) / 2;
        (upper_cdf[c] < 1.0 - kTailMass ? hi_a[c] : hi_b[c]) = mid;
      }
    }
  }

  std::vector<int64_t> lo(g), hi(g);
  size_t width = 1;
  for (size_t c = 0; c < g; ++c) {
    lo[c] = lo_b[c];
    hi[c] = std::max(hi_a[c], lo[c]);
    if (hi[c] - lo[c] + 1 > kMaxFactorizedAlphabet) {
      lo[c] = lo[c] + (hi[c] - lo[c]) / 2 - kMaxFactorizedAlphabet / 2;
      hi[c] = lo[c] + kMaxFactorizedAlphabet - 1;
    }
    width = std::max(width, static_cast<size_t>(hi[c] - lo[c] + 1));
  }
  Tensor values({g, width});
  for (size_t c = 0; c < g; ++c) {
    for (size_t i = 0; i < width; ++i) {
      values.at(c, i) = step * static_cast<double>(lo[c] + static_cast<int64_t>(i));
    }
  }
  const Tensor p = fd.Likelihood(params, values, step);
  std::vector<CdfTable> tables;
  tables.reserve(g);
  for (size_t c = 0; c < g; ++c) {
    const size_t count = static_cast<size_t>(hi[c] - lo[c] + 1);
    std::vector<double> probabilities(count);
    double covered = 0.0;
    for (size_t i = 0; i < count; ++i) {
      probabilities[i] = p.at(c, i);
      covered += probabilities[i];
    }
    tables.push_back(CdfTable::Build(static_cast<int32_t>(lo[c]), probabilities,
                                     std::max(1.0 - covered, kTailMass)));
  }
  return tables;
}

}  // namespace spc
