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

#include "spc/ops.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spc/error.h"

namespace spc::ops {
namespace {

void CheckSameShape(std::string_view op, Var a, Var b) {
  if (a.shape() != b.shape()) {
    Fail(ErrorCode::kInvalidArgument, op,
         "shape mismatch " + ShapeToString(a.shape()) + " vs " +
             ShapeToString(b.shape()));
  }
}

void CheckRank(std::string_view op, Var a, size_t rank) {
  if (a.shape().size() != rank) {
    Fail(ErrorCode::kInvalidArgument, op,
         "expected rank " + std::to_string(rank) + ", got shape " +
             ShapeToString(a.shape()));
  }
}

void CheckConstShape(std::string_view op, Var a, const Tensor& c) {
  if (a.shape() != c.shape()) {
    Fail(ErrorCode::kInvalidArgument, op,
         "constant shape " + ShapeToString(c.shape()) + " does not match " +
             ShapeToString(a.shape()));
  }
}

void CheckLabels(std::string_view op, const std::vector<uint8_t>& labels,
                 size_t pixels, size_t num_classes) {
  if (labels.size() != pixels) {
    Fail(ErrorCode::kInvalidArgument, op,
         "label raster has " + std::to_string(labels.size()) +
             " entries for " + std::to_string(pixels) + " pixels");
  }
  for (uint8_t l : labels) {
    if (l >= num_classes) {
      Fail(ErrorCode::kInvalidArgument, op,
           "label " + std::to_string(l) + " >= class count " +
               std::to_string(num_classes));
    }
  }
}

std::vector<double> ClassCounts(const std::vector<uint8_t>& labels,
                                size_t num_classes) {
  std::vector<double> counts(num_classes, 0.0);
  for (uint8_t l : labels) counts[l] += 1.0;
  return counts;
}

inline size_t Reflect(ptrdiff_t i, size_t n) {
  if (i < 0) return static_cast<size_t>(-i);
  if (i >= static_cast<ptrdiff_t>(n)) return 2 * n - 2 - static_cast<size_t>(i);
  return static_cast<size_t>(i);
}

// (C, H, W) -> (C, H + 2, W + 2) with one pixel of reflect padding.
Tensor PadReflect(const Tensor& x) {
  const size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  Tensor out({c, h + 2, w + 2});
  for (size_t ci = 0; ci < c; ++ci) {
    for (size_t y = 0; y < h + 2; ++y) {
      const size_t sy = Reflect(static_cast<ptrdiff_t>(y) - 1, h);
      const double* src = x.ptr() + (ci * h + sy) * w;
      double* dst = out.ptr() + (ci * (h + 2) + y) * (w + 2);
      dst[0] = src[1];
      std::copy(src, src + w, dst + 1);
      dst[w + 1] = src[w - 2];
    }
  }
  return out;
}

// Adjoint of PadReflect: folds padded gradients back onto source pixels.
void AccumulateUnpad(const Tensor& padded_grad, Tensor& grad) {
  const size_t c = grad.dim(0), h = grad.dim(1), w = grad.dim(2);
  for (size_t ci = 0; ci < c; ++ci) {
    for (size_t y = 0; y < h + 2; ++y) {
      const size_t sy = Reflect(static_cast<ptrdiff_t>(y) - 1, h);
      const double* src = padded_grad.ptr() + (ci * (h + 2) + y) * (w + 2);
      double* dst = grad.ptr() + (ci * h + sy) * w;
      dst[1] += src[0];
      for (size_t x = 0; x < w; ++x) dst[x] += src[x + 1];
      dst[w - 2] += src[w + 1];
    }
  }
}

void CheckSpatial(std::string_view op, Var x) {
  CheckRank(op, x, 3);
  if (x.shape()[1] < 2 || x.shape()[2] < 2) {
    Fail(ErrorCode::kInvalidArgument, op,
         "reflect padding needs H, W >= 2, got " + ShapeToString(x.shape()));
  }
}

template <typename F, typename D>
Var Unary(std::string_view op, Var a, F forward, D derivative) {
  Graph& g = *a.graph();
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (size_t i = 0; i < x.size(); ++i) y[i] = forward(x[i]);
  return g.Record(op, std::move(y), {a}, [&g, a, derivative](const Tensor& gy) {
    if (!g.requires_grad(a)) return;
    const Tensor& x = a.value();
    Tensor& gx = g.AccumGrad(a);
    for (size_t i = 0; i < x.size(); ++i) gx[i] += gy[i] * derivative(x[i]);
  });
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double NormalPdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

}  // namespace

Var Add(Var a, Var b) {
  CheckSameShape("add", a, b);
  Graph& g = *a.graph();
  Tensor y = a.value();
  for (size_t i = 0; i < y.size(); ++i) y[i] += b.value()[i];
  return g.Record("add", std::move(y), {a, b}, [&g, a, b](const Tensor& gy) {
    for (Var v : {a, b}) {
      if (!g.requires_grad(v)) continue;
      Tensor& gv = g.AccumGrad(v);
      for (size_t i = 0; i < gy.size(); ++i) gv[i] += gy[i];
    }
  });
}

Var Sub(Var a, Var b) {
  CheckSameShape("sub", a, b);
  Graph& g = *a.graph();
  Tensor y = a.value();
  for (size_t i = 0; i < y.size(); ++i) y[i] -= b.value()[i];
  return g.Record("sub", std::move(y), {a, b}, [&g, a, b](const Tensor& gy) {
    if (g.requires_grad(a)) {
      Tensor& ga = g.AccumGrad(a);
      for (size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i];
    }
    if (g.requires_grad(b)) {
      Tensor& gb = g.AccumGrad(b);
      for (size_t i = 0; i < gy.size(); ++i) gb[i] -= gy[i];
    }
  });
}

Var Mul(Var a, Var b) {
  CheckSameShape("mul", a, b);
  Graph& g = *a.graph();
  Tensor y = a.value();
  for (size_t i = 0; i < y.size(); ++i) y[i] *= b.value()[i];
  return g.Record("mul", std::move(y), {a, b}, [&g, a, b](const Tensor& gy) {
    if (g.requires_grad(a)) {
      Tensor& ga = g.AccumGrad(a);
      for (size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i] * b.value()[i];
    }
    if (g.requires_grad(b)) {
      Tensor& gb = g.AccumGrad(b);
      for (size_t i = 0; i < gy.size(); ++i) gb[i] += gy[i] * a.value()[i];
    }
  });
}

Var Scale(Var a, double factor) {
  return Unary("scale", a, [factor](double x) { return factor * x; },
               [factor](double) { return factor; });
}

Var AddConstant(Var a, const Tensor& c) {
  CheckConstShape("add_constant", a, c);
  Graph& g = *a.graph();
  Tensor y = a.value();
  for (size_t i = 0; i < y.size(); ++i) y[i] += c[i];
  return g.Record("add_constant", std::move(y), {a}, [&g, a](const Tensor& gy) {
    if (!g.requires_grad(a)) return;
    Tensor& ga = g.AccumGrad(a);
    for (size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i];
  });
}

Var MulConstant(Var a, const Tensor& c) {
  CheckConstShape("mul_constant", a, c);
  Graph& g = *a.graph();
  Tensor y = a.value();
  for (size_t i = 0; i < y.size(); ++i) y[i] *= c[i];
  return g.Record("mul_constant", std::move(y), {a},
                  [&g, a, c](const Tensor& gy) {
                    if (!g.requires_grad(a)) return;
                    Tensor& ga = g.AccumGrad(a);
                    for (size_t i = 0; i < gy.size(); ++i) {
                      ga[i] += gy[i] * c[i];
                    }
                  });
}

Var Sum(Var a) {
  Graph& g = *a.graph();
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return g.Record("sum", Tensor::Scalar(s), {a}, [&g, a](const Tensor& gy) {
    if (!g.requires_grad(a)) return;
    Tensor& ga = g.AccumGrad(a);
    for (size_t i = 0; i < ga.size(); ++i) ga[i] += gy[0];
  });
}

Var Mean(Var a) {
  const size_t n = a.value().size();
  if (n == 0) Fail(ErrorCode::kInvalidArgument, "mean", "empty tensor");
  return Scale(Sum(a), 1.0 / static_cast<double>(n));
}

Var MeanSquaredError(Var a, const Tensor& target) {
  CheckConstShape("mse", a, target);
  Graph& g = *a.graph();
  const size_t n = target.size();
  if (n == 0) Fail(ErrorCode::kInvalidArgument, "mse", "empty tensor");
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = a.value()[i] - target[i];
    s += d * d;
  }
  return g.Record("mse", Tensor::Scalar(s / n), {a},
                  [&g, a, target](const Tensor& gy) {
                    if (!g.requires_grad(a)) return;
                    Tensor& ga = g.AccumGrad(a);
                    const double k = 2.0 * gy[0] / target.size();
                    for (size_t i = 0; i < ga.size(); ++i) {
                      ga[i] += k * (a.value()[i] - target[i]);
                    }
                  });
}

Var Reshape(Var a, Shape shape) {
  if (NumElements(shape) != a.value().size()) {
    Fail(ErrorCode::kInvalidArgument, "reshape",
         "cannot reshape " + ShapeToString(a.shape()) + " to " +
             ShapeToString(shape));
  }
  Graph& g = *a.graph();
  return g.Record("reshape", a.value().Reshaped(std::move(shape)), {a},
                  [&g, a](const Tensor& gy) {
                    if (!g.requires_grad(a)) return;
                    Tensor& ga = g.AccumGrad(a);
                    for (size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i];
                  });
}

Var SliceRows(Var a, size_t begin, size_t end) {
  CheckRank("slice_rows", a, 2);
  const size_t rows = a.shape()[0], cols = a.shape()[1];
  if (begin > end || end > rows) {
    Fail(ErrorCode::kInvalidArgument, "slice_rows",
         "rows [" + std::to_string(begin) + "," + std::to_string(end) +
             ") out of " + ShapeToString(a.shape()));
  }
  Graph& g = *a.graph();
  const double* src = a.value().ptr() + begin * cols;
  Tensor y({end - begin, cols},
           std::vector<double>(src, src + (end - begin) * cols));
  return g.Record("slice_rows", std::move(y), {a},
                  [&g, a, begin, cols](const Tensor& gy) {
                    if (!g.requires_grad(a)) return;
                    Tensor& ga = g.AccumGrad(a);
                    for (size_t i = 0; i < gy.size(); ++i) {
                      ga[begin * cols + i] += gy[i];
                    }
                  });
}

Var MatMul(Var w, Var x) {
  CheckRank("matmul", w, 2);
  CheckRank("matmul", x, 2);
  const size_t out = w.shape()[0], in = w.shape()[1], m = x.shape()[1];
  if (x.shape()[0] != in) {
    Fail(ErrorCode::kInvalidArgument, "matmul",
         "inner dimensions differ: " + ShapeToString(w.shape()) + " x " +
             ShapeToString(x.shape()));
  }
  Graph& g = *w.graph();
  Tensor y({out, m});
  const Tensor& wv = w.value();
  const Tensor& xv = x.value();
  for (size_t o = 0; o < out; ++o) {
    double* yr = y.ptr() + o * m;
    for (size_t i = 0; i < in; ++i) {
      const double wi = wv[o * in + i];
      if (wi == 0.0) continue;
      const double* xr = xv.ptr() + i * m;
      for (size_t j = 0; j < m; ++j) yr[j] += wi * xr[j];
    }
  }
  return g.Record("matmul", std::move(y), {w, x},
                  [&g, w, x, out, in, m](const Tensor& gy) {
                    const Tensor& wv = w.value();
                    const Tensor& xv = x.value();
                    if (g.requires_grad(w)) {
                      Tensor& gw = g.AccumGrad(w);
                      for (size_t o = 0; o < out; ++o) {
                        const double* gr = gy.ptr() + o * m;
                        for (size_t i = 0; i < in; ++i) {
                          const double* xr = xv.ptr() + i * m;
                          double s = 0.0;
                          for (size_t j = 0; j < m; ++j) s += gr[j] * xr[j];
                          gw[o * in + i] += s;
                        }
                      }
                    }
                    if (g.requires_grad(x)) {
                      Tensor& gx = g.AccumGrad(x);
                      for (size_t o = 0; o < out; ++o) {
                        const double* gr = gy.ptr() + o * m;
                        for (size_t i = 0; i < in; ++i) {
                          const double wi = wv[o * in + i];
                          double* gxr = gx.ptr() + i * m;
                          for (size_t j = 0; j < m; ++j) gxr[j] += wi * gr[j];
                        }
                      }
                    }
                  });
}

Var AddBias(Var x, Var b) {
  CheckRank("add_bias", b, 1);
  if (x.shape().size() < 2 || x.shape()[0] != b.shape()[0]) {
    Fail(ErrorCode::kInvalidArgument, "add_bias",
         "bias " + ShapeToString(b.shape()) + " does not match " +
             ShapeToString(x.shape()));
  }
  Graph& g = *x.graph();
  const size_t rows = x.shape()[0];
  const size_t inner = x.value().size() / rows;
  Tensor y = x.value();
  for (size_t r = 0; r < rows; ++r) {
    const double br = b.value()[r];
    for (size_t j = 0; j < inner; ++j) y[r * inner + j] += br;
  }
  return g.Record("add_bias", std::move(y), {x, b},
                  [&g, x, b, rows, inner](const Tensor& gy) {
                    if (g.requires_grad(x)) {
                      Tensor& gx = g.AccumGrad(x);
                      for (size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
                    }
                    if (g.requires_grad(b)) {
                      Tensor& gb = g.AccumGrad(b);
                      for (size_t r = 0; r < rows; ++r) {
                        double s = 0.0;
                        for (size_t j = 0; j < inner; ++j) {
                          s += gy[r * inner + j];
                        }
                        gb[r] += s;
                      }
                    }
                  });
}

Var BatchedAffine(Var w, Var b, Var x) {
  CheckRank("batched_affine", w, 3);
  CheckRank("batched_affine", b, 2);
  CheckRank("batched_affine", x, 3);
  const size_t groups = w.shape()[0], out = w.shape()[1], in = w.shape()[2];
  const size_t m = x.shape()[2];
  if (b.shape() != Shape{groups, out} || x.shape()[0] != groups ||
      x.shape()[1] != in) {
    Fail(ErrorCode::kInvalidArgument, "batched_affine",
         "inconsistent shapes w" + ShapeToString(w.shape()) + " b" +
             ShapeToString(b.shape()) + " x" + ShapeToString(x.shape()));
  }
  Graph& g = *w.graph();
  Tensor y({groups, out, m});
  for (size_t k = 0; k < groups; ++k) {
    for (size_t o = 0; o < out; ++o) {
      double* yr = y.ptr() + (k * out + o) * m;
      const double bo = b.value()[k * out + o];
      for (size_t j = 0; j < m; ++j) yr[j] = bo;
      for (size_t i = 0; i < in; ++i) {
        const double wi = w.value()[(k * out + o) * in + i];
        const double* xr = x.value().ptr() + (k * in + i) * m;
        for (size_t j = 0; j < m; ++j) yr[j] += wi * xr[j];
      }
    }
  }
  return g.Record(
      "batched_affine", std::move(y), {w, b, x},
      [&g, w, b, x, groups, out, in, m](const Tensor& gy) {
        const bool need_w = g.requires_grad(w);
        const bool need_b = g.requires_grad(b);
        const bool need_x = g.requires_grad(x);
        for (size_t k = 0; k < groups; ++k) {
          for (size_t o = 0; o < out; ++o) {
            const double* gr = gy.ptr() + (k * out + o) * m;
            if (need_b) {
              double s = 0.0;
              for (size_t j = 0; j < m; ++j) s += gr[j];
              g.AccumGrad(b)[k * out + o] += s;
            }
            for (size_t i = 0; i < in; ++i) {
              const double* xr = x.value().ptr() + (k * in + i) * m;
              if (need_w) {
                double s = 0.0;
                for (size_t j = 0; j < m; ++j) s += gr[j] * xr[j];
                g.AccumGrad(w)[(k * out + o) * in + i] += s;
              }
              if (need_x) {
                const double wi = w.value()[(k * out + o) * in + i];
                double* gx = g.AccumGrad(x).ptr() + (k * in + i) * m;
                for (size_t j = 0; j < m; ++j) gx[j] += wi * gr[j];
              }
            }
          }
        }
      });
}

Var Conv3x3(Var x, Var w) {
  CheckSpatial("conv3x3", x);
  CheckRank("conv3x3", w, 4);
  const size_t cin = x.shape()[0], h = x.shape()[1], wd = x.shape()[2];
  const size_t cout = w.shape()[0];
  if (w.shape()[1] != cin || w.shape()[2] != 3 || w.shape()[3] != 3) {
    Fail(ErrorCode::kInvalidArgument, "conv3x3",
         "kernel " + ShapeToString(w.shape()) + " does not fit input " +
             ShapeToString(x.shape()));
  }
  Graph& g = *x.graph();
  const size_t pw = wd + 2;
  Tensor padded = PadReflect(x.value());
  Tensor y({cout, h, wd});
  for (size_t co = 0; co < cout; ++co) {
    double* yc = y.ptr() + co * h * wd;
    for (size_t ci = 0; ci < cin; ++ci) {
      for (size_t k = 0; k < 9; ++k) {
        const double wk = w.value()[(co * cin + ci) * 9 + k];
        const size_t ky = k / 3, kx = k % 3;
        for (size_t yy = 0; yy < h; ++yy) {
          const double* src = padded.ptr() + (ci * (h + 2) + yy + ky) * pw + kx;
          double* dst = yc + yy * wd;
          for (size_t xx = 0; xx < wd; ++xx) dst[xx] += wk * src[xx];
        }
      }
    }
  }
  return g.Record(
      "conv3x3", std::move(y), {x, w},
      [&g, x, w, padded = std::move(padded), cin, cout, h, wd,
       pw](const Tensor& gy) {
        const bool need_x = g.requires_grad(x);
        Tensor gpad;
        if (need_x) gpad = Tensor(padded.shape());
        Tensor* gw = g.requires_grad(w) ? &g.AccumGrad(w) : nullptr;
        for (size_t co = 0; co < cout; ++co) {
          const double* gc = gy.ptr() + co * h * wd;
          for (size_t ci = 0; ci < cin; ++ci) {
            for (size_t k = 0; k < 9; ++k) {
              const size_t ky = k / 3, kx = k % 3;
              const size_t off = (ci * (h + 2) + ky) * pw + kx;
              if (gw != nullptr) {
                double s = 0.0;
                for (size_t yy = 0; yy < h; ++yy) {
                  const double* src = padded.ptr() + off + yy * pw;
                  const double* gr = gc + yy * wd;
                  for (size_t xx = 0; xx < wd; ++xx) s += gr[xx] * src[xx];
                }
                (*gw)[(co * cin + ci) * 9 + k] += s;
              }
              if (need_x) {
                const double wk = w.value()[(co * cin + ci) * 9 + k];
                for (size_t yy = 0; yy < h; ++yy) {
                  double* dst = gpad.ptr() + off + yy * pw;
                  const double* gr = gc + yy * wd;
                  for (size_t xx = 0; xx < wd; ++xx) dst[xx] += wk * gr[xx];
                }
              }
            }
          }
        }
        if (need_x) AccumulateUnpad(gpad, g.AccumGrad(x));
      });
}

Var Relu(Var a) {
  Graph& g = *a.graph();
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (size_t i = 0; i < x.size(); ++i) {
    const bool on = x[i] > 0.0;
    g.NoteBranch(on);
    y[i] = on ? x[i] : 0.0;
  }
  return g.Record("relu", std::move(y), {a}, [&g, a](const Tensor& gy) {
    if (!g.requires_grad(a)) return;
    const Tensor& x = a.value();
    Tensor& gx = g.AccumGrad(a);
    for (size_t i = 0; i < x.size(); ++i) {
      if (x[i] > 0.0) gx[i] += gy[i];
    }
  });
}

Var Exp(Var a) {
  return Unary("exp", a, [](double x) { return std::exp(x); },
               [](double x) { return std::exp(x); });
}

Var Softplus(Var a) {
  return Unary(
      "softplus", a,
      [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); },
      [](double x) { return Sigmoid(x); });
}

Var Tanh(Var a) {
  return Unary("tanh", a, [](double x) { return std::tanh(x); },
               [](double x) {
                 const double t = std::tanh(x);
                 return 1.0 - t * t;
               });
}

Var ClampMin(Var a, double floor) {
  Graph& g = *a.graph();
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (size_t i = 0; i < x.size(); ++i) {
    const bool pass = x[i] > floor;
    g.NoteBranch(pass);
    y[i] = pass ? x[i] : floor;
  }
  return g.Record("clamp_min", std::move(y), {a},
                  [&g, a, floor](const Tensor& gy) {
                    if (!g.requires_grad(a)) return;
                    const Tensor& x = a.value();
                    Tensor& gx = g.AccumGrad(a);
                    for (size_t i = 0; i < x.size(); ++i) {
                      if (x[i] > floor) gx[i] += gy[i];
                    }
                  });
}

Var TanhGate(Var h, Var a) {
  CheckRank("tanh_gate", h, 3);
  CheckRank("tanh_gate", a, 2);
  const size_t groups = h.shape()[0], k = h.shape()[1], m = h.shape()[2];
  if (a.shape() != Shape{groups, k}) {
    Fail(ErrorCode::kInvalidArgument, "tanh_gate",
         "gate " + ShapeToString(a.shape()) + " does not match " +
             ShapeToString(h.shape()));
  }
  Graph& g = *h.graph();
  Tensor y(h.shape());
  for (size_t r = 0; r < groups * k; ++r) {
    const double ta = std::tanh(a.value()[r]);
    for (size_t j = 0; j < m; ++j) {
      const double hv = h.value()[r * m + j];
      y[r * m + j] = hv + ta * std::tanh(hv);
    }
  }
  return g.Record("tanh_gate", std::move(y), {h, a},
                  [&g, h, a, groups, k, m](const Tensor& gy) {
                    for (size_t r = 0; r < groups * k; ++r) {
                      const double ta = std::tanh(a.value()[r]);
                      double ga = 0.0;
                      for (size_t j = 0; j < m; ++j) {
                        const double th = std::tanh(h.value()[r * m + j]);
                        const double gj = gy[r * m + j];
                        if (g.requires_grad(h)) {
                          g.AccumGrad(h)[r * m + j] +=
                              gj * (1.0 + ta * (1.0 - th * th));
                        }
                        ga += gj * th;
                      }
                      if (g.requires_grad(a)) {
                        g.AccumGrad(a)[r] += ga * (1.0 - ta * ta);
                      }
                    }
                  });
}

Var RegionMean(Var x, const std::vector<uint8_t>& labels, size_t num_classes) {
  CheckRank("region_mean", x, 3);
  const size_t c = x.shape()[0], hw = x.shape()[1] * x.shape()[2];
  CheckLabels("region_mean", labels, hw, num_classes);
  Graph& g = *x.graph();
  const std::vector<double> counts = ClassCounts(labels, num_classes);
  Tensor y({c, num_classes});
  for (size_t ci = 0; ci < c; ++ci) {
    const double* src = x.value().ptr() + ci * hw;
    double* dst = y.ptr() + ci * num_classes;
    for (size_t p = 0; p < hw; ++p) dst[labels[p]] += src[p];
    for (size_t n = 0; n < num_classes; ++n) {
      if (counts[n] > 0) dst[n] /= counts[n];
    }
  }
  return g.Record("region_mean", std::move(y), {x},
                  [&g, x, labels, counts, c, hw, num_classes](const Tensor& gy) {
                    if (!g.requires_grad(x)) return;
                    Tensor& gx = g.AccumGrad(x);
                    for (size_t ci = 0; ci < c; ++ci) {
                      const double* gr = gy.ptr() + ci * num_classes;
                      double* dst = gx.ptr() + ci * hw;
                      for (size_t p = 0; p < hw; ++p) {
                        dst[p] += gr[labels[p]] / counts[labels[p]];
                      }
                    }
                  });
}

Var RegionBroadcast(Var p, const std::vector<uint8_t>& labels, size_t height,
                    size_t width) {
  CheckRank("region_broadcast", p, 2);
  const size_t c = p.shape()[0], n = p.shape()[1], hw = height * width;
  CheckLabels("region_broadcast", labels, hw, n);
  Graph& g = *p.graph();
  Tensor y({c, height, width});
  for (size_t ci = 0; ci < c; ++ci) {
    const double* src = p.value().ptr() + ci * n;
    double* dst = y.ptr() + ci * hw;
    for (size_t q = 0; q < hw; ++q) dst[q] = src[labels[q]];
  }
  return g.Record("region_broadcast", std::move(y), {p},
                  [&g, p, labels, c, n, hw](const Tensor& gy) {
                    if (!g.requires_grad(p)) return;
                    Tensor& gp = g.AccumGrad(p);
                    for (size_t ci = 0; ci < c; ++ci) {
                      const double* gr = gy.ptr() + ci * hw;
                      double* dst = gp.ptr() + ci * n;
                      for (size_t q = 0; q < hw; ++q) dst[labels[q]] += gr[q];
                    }
                  });
}

Var RegionPatchMean(Var x, const std::vector<uint8_t>& labels,
                    size_t num_classes) {
  CheckSpatial("region_patch_mean", x);
  const size_t cin = x.shape()[0], h = x.shape()[1], wd = x.shape()[2];
  CheckLabels("region_patch_mean", labels, h * wd, num_classes);
  Graph& g = *x.graph();
  const std::vector<double> counts = ClassCounts(labels, num_classes);
  const size_t pw = wd + 2;
  const Tensor padded = PadReflect(x.value());
  Tensor y({cin * 9, num_classes});
  for (size_t ci = 0; ci < cin; ++ci) {
    for (size_t k = 0; k < 9; ++k) {
      const size_t ky = k / 3, kx = k % 3;
      double* dst = y.ptr() + (ci * 9 + k) * num_classes;
      for (size_t yy = 0; yy < h; ++yy) {
        const double* src = padded.ptr() + (ci * (h + 2) + yy + ky) * pw + kx;
        const uint8_t* row = labels.data() + yy * wd;
        for (size_t xx = 0; xx < wd; ++xx) dst[row[xx]] += src[xx];
      }
      for (size_t n = 0; n < num_classes; ++n) {
        if (counts[n] > 0) dst[n] /= counts[n];
      }
    }
  }
  return g.Record(
      "region_patch_mean", std::move(y), {x},
      [&g, x, labels, counts, cin, h, wd, pw, num_classes](const Tensor& gy) {
        if (!g.requires_grad(x)) return;
        Tensor gpad({cin, h + 2, pw});
        std::vector<double> scaled(num_classes);
        for (size_t ci = 0; ci < cin; ++ci) {
          for (size_t k = 0; k < 9; ++k) {
            const size_t ky = k / 3, kx = k % 3;
            const double* gr = gy.ptr() + (ci * 9 + k) * num_classes;
            for (size_t n = 0; n < num_classes; ++n) {
              scaled[n] = counts[n] > 0 ? gr[n] / counts[n] : 0.0;
            }
            for (size_t yy = 0; yy < h; ++yy) {
              double* dst = gpad.ptr() + (ci * (h + 2) + yy + ky) * pw + kx;
              const uint8_t* row = labels.data() + yy * wd;
              for (size_t xx = 0; xx < wd; ++xx) dst[xx] += scaled[row[xx]];
            }
          }
        }
        AccumulateUnpad(gpad, g.AccumGrad(x));
      });
}

Var GaussianIntervalMass(Var v, Var mu, Var sigma, double delta) {
  CheckSameShape("gaussian_interval_mass", v, mu);
  CheckSameShape("gaussian_interval_mass", v, sigma);
  Graph& g = *v.graph();
  const size_t n = v.value().size();
  Tensor p(v.shape());
  for (size_t i = 0; i < n; ++i) {
    const double s = sigma.value()[i];
    if (!(s > 0.0)) {
      Fail(ErrorCode::kInvalidArgument, "gaussian_interval_mass",
           "non-positive scale");
    }
    const double centered = v.value()[i] - mu.value()[i];
    const double upper = (centered + 0.5 * delta) / s;
    const double lower = (centered - 0.5 * delta) / s;
    // Difference of upper-tail masses is accurate far right of the mean,
    // difference of lower-tail masses far left; both are exact in between.
    if (centered > 0.0) {
      p[i] = 0.5 * (std::erfc(lower * kInvSqrt2) - std::erfc(upper * kInvSqrt2));
    } else {
      p[i] = 0.5 * (std::erfc(-upper * kInvSqrt2) - std::erfc(-lower * kInvSqrt2));
    }
  }
  return g.Record(
      "gaussian_interval_mass", std::move(p), {v, mu, sigma},
      [&g, v, mu, sigma, delta, n](const Tensor& gp) {
        for (size_t i = 0; i < n; ++i) {
          const double s = sigma.value()[i];
          const double centered = v.value()[i] - mu.value()[i];
          const double upper = (centered + 0.5 * delta) / s;
          const double lower = (centered - 0.5 * delta) / s;
          const double pu = NormalPdf(upper), pl = NormalPdf(lower);
          const double d_center = gp[i] * (pu - pl) / s;
          if (g.requires_grad(v)) g.AccumGrad(v)[i] += d_center;
          if (g.requires_grad(mu)) g.AccumGrad(mu)[i] -= d_center;
          if (g.requires_grad(sigma)) {
            g.AccumGrad(sigma)[i] -= gp[i] * (upper * pu - lower * pl) / s;
          }
        }
      });
}

Var LogisticIntervalMass(Var lower, Var upper) {
  CheckSameShape("logistic_interval_mass", lower, upper);
  Graph& g = *lower.graph();
  const size_t n = lower.value().size();
  Tensor p(lower.shape());
  for (size_t i = 0; i < n; ++i) {
    const double l = lower.value()[i], u = upper.value()[i];
    const double s = (l + u > 0.0) ? -1.0 : 1.0;
    p[i] = std::abs(Sigmoid(s * u) - Sigmoid(s * l));
  }
  return g.Record(
      "logistic_interval_mass", std::move(p), {lower, upper},
      [&g, lower, upper, n](const Tensor& gp) {
        for (size_t i = 0; i < n; ++i) {
          const double l = lower.value()[i], u = upper.value()[i];
          const double s = (l + u > 0.0) ? -1.0 : 1.0;
          const double su = Sigmoid(s * u), sl = Sigmoid(s * l);
          const double sign = (su - sl >= 0.0) ? 1.0 : -1.0;
          if (g.requires_grad(upper)) {
            g.AccumGrad(upper)[i] += gp[i] * sign * s * su * (1.0 - su);
          }
          if (g.requires_grad(lower)) {
            g.AccumGrad(lower)[i] -= gp[i] * sign * s * sl * (1.0 - sl);
          }
        }
      });
}

Var NegLog2(Var p, double floor) {
  Graph& g = *p.graph();
  const Tensor& x = p.value();
  Tensor y(x.shape());
  for (size_t i = 0; i < x.size(); ++i) {
    const bool above = x[i] > floor;
    g.NoteBranch(above);
    y[i] = -std::log2(above ? x[i] : floor);
  }
  return g.Record("neg_log2", std::move(y), {p},
                  [&g, p, floor](const Tensor& gy) {
                    if (!g.requires_grad(p)) return;
                    const Tensor& x = p.value();
                    Tensor& gx = g.AccumGrad(p);
                    for (size_t i = 0; i < x.size(); ++i) {
                      if (x[i] > floor) {
                        gx[i] -= gy[i] / (x[i] * std::numbers::ln2);
                      }
                    }
                  });
}

}  // namespace spc::ops
