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

#ifndef SPC_GRADCHECK_H_
#define SPC_GRADCHECK_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "spc/autodiff.h"
#include "spc/param_store.h"
#include "spc/rng.h"

namespace spc {

inline constexpr double kGradCheckStep = 1e-3;
inline constexpr double kGradCheckTolerance = 1e-4;

// A scalar function of the tensors in `params`.
struct GradProblem {
  ParamStore params;
  std::function<Var(Graph&)> build;
};

struct GradSuite {
  std::string name;
  // Draws a fresh random point.
  std::function<GradProblem(Rng&)> make;
};

struct GradCheckResult {
  std::string name;
  int points = 0;
  int coordinates = 0;  // coordinates compared
  int kinks = 0;        // coordinates redrawn because the step crossed a kink
  double max_error = 0.0;              // per probe point, decides `passed`
  double max_tensor_error = 0.0;       // informational
  double max_elementwise_error = 0.0;  // informational
  bool passed = false;
};

// |a - n| / max(|a|, |n|, floor): relative error with an absolute floor
// for gradients that vanish.
double GradientError(double analytic, double numeric);
// Vector form: max |a - n| over the compared elements, relative to the
// largest gradient magnitude among them.
double GradientError(std::span<const double> analytic,
                     std::span<const double> numeric);

// Compares analytic gradients with central differences at `points` random
// points, on up to `coords_per_tensor` random elements of every tensor.
// Coordinates whose +-h evaluations take a different piecewise branch are
// redrawn.
GradCheckResult CheckGradients(const GradSuite& suite, uint64_t seed,
                               int points = 10, int coords_per_tensor = 6,
                               double step = kGradCheckStep);

std::vector<GradSuite> OperatorSuites();
std::vector<GradSuite> NetworkSuites();

std::vector<GradCheckResult> RunGradientSuites(uint64_t seed, int points = 10);

}  // namespace spc

#endif  // SPC_GRADCHECK_H_
