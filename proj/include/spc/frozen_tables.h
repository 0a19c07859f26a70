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

#ifndef SPC_FROZEN_TABLES_H_
#define SPC_FROZEN_TABLES_H_

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "spc/entropy_models.h"
#include "spc/param_store.h"
#include "spc/range_coder.h"

namespace spc {

// Geometric grid of 64 Gaussian scales from 0.1 to 256 quantization steps.
inline constexpr int kNumScales = 64;
inline constexpr double kMinScaleSteps = 0.1;
inline constexpr double kMaxScaleSteps = 256.0;
// Means are snapped to 1/16 of a quantization step.
inline constexpr int kMeanSubsteps = 16;
// Tables span the snapped mean +- 16 snapped scales.
inline constexpr double kTableRadiusScales = 16.0;

double ScaleGridSteps(int index);
int SnapScaleIndex(double scale, double step);
int64_t SnapMeanSubsteps(double mean, double step);

// A Gaussian reduced to transmitted-grid parameters, with a table over
// symbols relative to `offset`.
struct FrozenGaussian {
  int64_t offset = 0;  // absolute symbol = offset + table symbol
  const CdfTable* table = nullptr;
  double mean = 0.0;   // snapped, in value units
  double scale = 0.0;  // snapped, in value units
  int scale_index = 0;
};

// Builds and caches the 16 x 64 distinct tables. Tables depend only on the
// snapped (mean fraction, scale index) pair, so encoder and decoder agree
// whenever they see the same z~. Not thread-safe.
class GaussianTableBank {
 public:
  explicit GaussianTableBank(double step);

  double step() const { return step_; }
  FrozenGaussian Freeze(double mean, double scale);
  const CdfTable& Table(int mean_fraction, int scale_index);

 private:
  double step_;
  std::array<std::unique_ptr<CdfTable>, kMeanSubsteps * kNumScales> tables_;
};

// Snapped copy of `gp`, used for model-side estimates that must agree with
// the frozen tables.
GaussianParams SnapGaussianParams(const GaussianParams& gp, double step);

// One table per channel of a factorized density, over the grid symbols
// carrying all but ~1e-9 of the mass (at most 16384 symbols), with escape.
std::vector<CdfTable> FreezeFactorizedTables(const FactorizedDensity& fd,
                                             const ParamStore& params,
                                             double step);

}  // namespace spc

#endif  // SPC_FROZEN_TABLES_H_
