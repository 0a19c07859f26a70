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

#ifndef SPC_OPS_H_
#define SPC_OPS_H_

#include <cstdint>
#include <vector>

#include "spc/autodiff.h"

// The closed operator set used by every network in the codec. Each operator
// validates shapes (failing with its own name), records its output on the
// input graph and supplies the analytic backward pass.
namespace spc::ops {

// Elementwise arithmetic on equal shapes.
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);
Var Scale(Var a, double factor);
Var AddConstant(Var a, const Tensor& c);
Var MulConstant(Var a, const Tensor& c);

// Reductions to a scalar.
Var Sum(Var a);
Var Mean(Var a);
Var MeanSquaredError(Var a, const Tensor& target);

Var Reshape(Var a, Shape shape);
// Rows [begin, end) of a rank-2 tensor.
Var SliceRows(Var a, size_t begin, size_t end);

// Channel mixing: w (out, in) times x (in, M) -> (out, M). Applied to a
// (C, N) prior this is a 1x1 convolution over regions.
Var MatMul(Var w, Var x);
// Adds b[i] to every element of row i of x (rank 2 or 3).
Var AddBias(Var x, Var b);
// Per-group affine map: w (G, out, in), b (G, out), x (G, in, M).
Var BatchedAffine(Var w, Var b, Var x);

// 3x3 convolution with reflect padding, stride 1: x (Cin, H, W), w (Cout,
// Cin, 3, 3) -> (Cout, H, W). H and W must be at least 2.
Var Conv3x3(Var x, Var w);

// Nonlinearities.
Var Relu(Var a);
Var Exp(Var a);
Var Softplus(Var a);
Var Tanh(Var a);
Var ClampMin(Var a, double floor);
// h + tanh(a) * tanh(h) with a (G, K) broadcast over h (G, K, M).
Var TanhGate(Var h, Var a);

// Semantic-region operators. `labels` is an H*W raster of class indices
// below `num_classes`.
// Mean of each channel over the pixels of each class: (C, H, W) -> (C, N).
// Classes without pixels produce zero columns.
Var RegionMean(Var x, const std::vector<uint8_t>& labels, size_t num_classes);
// Inverse layout: (C, N) -> (C, H, W), each pixel taking its class column.
Var RegionBroadcast(Var p, const std::vector<uint8_t>& labels, size_t height,
                    size_t width);
// Per-class means of the reflect-padded 3x3 neighbourhoods: (Cin, H, W) ->
// (Cin * 9, N), row index ci * 9 + ky * 3 + kx. Multiplying by a conv
// kernel reshaped to (Cout, Cin * 9) equals RegionMean(Conv3x3(x, w)).
Var RegionPatchMean(Var x, const std::vector<uint8_t>& labels,
                    size_t num_classes);

// Probability mass of [v - delta/2, v + delta/2) under N(mu, sigma^2).
Var GaussianIntervalMass(Var v, Var mu, Var sigma, double delta);
// Mass between two cumulative logits: |sigmoid(s*upper) - sigmoid(s*lower)|
// with s = -sign(lower + upper) for tail accuracy.
Var LogisticIntervalMass(Var lower, Var upper);
// -log2(max(p, floor)).
Var NegLog2(Var p, double floor);

}  // namespace spc::ops

#endif  // SPC_OPS_H_
