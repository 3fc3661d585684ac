// tensor/ops.cc

// Copyright 2026  The kwsdistill Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "tensor/ops.h"

#include <cmath>
#include <cstring>
#include <utility>

#include "tensor/kernels.h"

namespace kwsd {
namespace ops {

namespace {

Tensor MakeResult(const char *name, std::vector<int64_t> shape,
                  std::vector<double> data,
                  std::vector<std::shared_ptr<TensorImpl>> inputs,
                  std::function<void(TensorImpl &)> backward) {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(data);
  bool tracked = false;
  for (const auto &in : inputs)
    if (in->tracked) tracked = true;
  impl->tracked = tracked;
  if (tracked) {
    auto node = std::make_shared<OpNode>();
    node->name = name;
    node->inputs = std::move(inputs);
    node->backward = std::move(backward);
    impl->node = std::move(node);
  }
  return Tensor(std::move(impl));
}

void CheckSameShape(const char *op, const Tensor &a, const Tensor &b) {
  if (a.Shape() != b.Shape())
    throw ValidationError(std::string(op) + ": shape mismatch " +
                          ShapeToString(a.Shape()) + " vs " +
                          ShapeToString(b.Shape()));
}

void CheckMatrix(const char *op, const Tensor &a) {
  if (a.Rank() != 2)
    throw ValidationError(std::string(op) + ": expected matrix, got shape " +
                          ShapeToString(a.Shape()));
}

// Adds src into dst's grad if it is tracked.
void AccumulateInto(const std::shared_ptr<TensorImpl> &dst,
                    const double *src, int64_t n) {
  if (!dst->tracked) return;
  double *g = GradBuf(dst.get());
  for (int64_t i = 0; i < n; i++) g[i] += src[i];
}

struct Dims2 {
  int64_t r, c;
};
Dims2 MatDims(const Tensor &m) { return {m.Dim(0), m.Dim(1)}; }

}  // namespace

Tensor Add(const Tensor &a, const Tensor &b) {
  CheckSameShape("add", a, b);
  const int64_t n = a.NumElements();
  std::vector<double> out(static_cast<size_t>(n));
  const double *pa = a.Data(), *pb = b.Data();
  ParallelFor(n, [&](int64_t i) { out[i] = pa[i] + pb[i]; });
  auto ia = a.Impl(), ib = b.Impl();
  return MakeResult("add", a.Shape(), std::move(out), {ia, ib},
                    [ia, ib, n](TensorImpl &o) {
                      AccumulateInto(ia, o.grad.data(), n);
                      AccumulateInto(ib, o.grad.data(), n);
                    });
}

Tensor Sub(const Tensor &a, const Tensor &b) {
  CheckSameShape("sub", a, b);
  const int64_t n = a.NumElements();
  std::vector<double> out(static_cast<size_t>(n));
  const double *pa = a.Data(), *pb = b.Data();
  ParallelFor(n, [&](int64_t i) { out[i] = pa[i] - pb[i]; });
  auto ia = a.Impl(), ib = b.Impl();
  return MakeResult("sub", a.Shape(), std::move(out), {ia, ib},
                    [ia, ib, n](TensorImpl &o) {
                      AccumulateInto(ia, o.grad.data(), n);
                      if (ib->tracked) {
                        double *g = GradBuf(ib.get());
                        for (int64_t i = 0; i < n; i++) g[i] -= o.grad[i];
                      }
                    });
}

Tensor Mul(const Tensor &a, const Tensor &b) {
  CheckSameShape("mul", a, b);
  const int64_t n = a.NumElements();
  std::vector<double> out(static_cast<size_t>(n));
  const double *pa = a.Data(), *pb = b.Data();
  ParallelFor(n, [&](int64_t i) { out[i] = pa[i] * pb[i]; });
  auto ia = a.Impl(), ib = b.Impl();
  return MakeResult("mul", a.Shape(), std::move(out), {ia, ib},
                    [ia, ib, n](TensorImpl &o) {
                      if (ia->tracked) {
                        double *g = GradBuf(ia.get());
                        for (int64_t i = 0; i < n; i++)
                          g[i] = std::fma(o.grad[i], ib->data[i], g[i]);
                      }
                      if (ib->tracked) {
                        double *g = GradBuf(ib.get());
                        for (int64_t i = 0; i < n; i++)
                          g[i] = std::fma(o.grad[i], ia->data[i], g[i]);
                      }
                    });
}

Tensor ScalarMul(const Tensor &a, double c) {
  const int64_t n = a.NumElements();
  std::vector<double> out(static_cast<size_t>(n));
  const double *pa = a.Data();
  ParallelFor(n, [&](int64_t i) { out[i] = pa[i] * c; });
  auto ia = a.Impl();
  return MakeResult("scalar_mul", a.Shape(), std::move(out), {ia},
                    [ia, c, n](TensorImpl &o) {
                      if (!ia->tracked) return;
                      double *g = GradBuf(ia.get());
                      for (int64_t i = 0; i < n; i++)
                        g[i] = std::fma(o.grad[i], c, g[i]);
                    });
}

Tensor ScalarAdd(const Tensor &a, double c) {
  const int64_t n = a.NumElements();
  std::vector<double> out(static_cast<size_t>(n));
  const double *pa = a.Data();
  ParallelFor(n, [&](int64_t i) { out[i] = pa[i] + c; });
  auto ia = a.Impl();
  return MakeResult("scalar_add", a.Shape(), std::move(out), {ia},
                    [ia, n](TensorImpl &o) { AccumulateInto(ia, o.grad.data(), n); });
}

Tensor MulScalarTensor(const Tensor &a, const Tensor &s) {
  if (!s.IsScalar())
    throw ValidationError("mul_scalar_tensor: scale must be rank 0, got shape " +
                          ShapeToString(s.Shape()));
  const int64_t n = a.NumElements();
  const double sv = s.At(0);
  std::vector<double> out(static_cast<size_t>(n));
  const double *pa = a.Data();
  ParallelFor(n, [&](int64_t i) { out[i] = pa[i] * sv; });
  auto ia = a.Impl(), is = s.Impl();
  return MakeResult("mul_scalar_tensor", a.Shape(), std::move(out), {ia, is},
                    [ia, is, sv, n](TensorImpl &o) {
                      if (ia->tracked) {
                        double *g = GradBuf(ia.get());
                        for (int64_t i = 0; i < n; i++)
                          g[i] = std::fma(o.grad[i], sv, g[i]);
                      }
                      if (is->tracked) {
                        double acc = 0.0;
                        for (int64_t i = 0; i < n; i++)
                          acc = std::fma(o.grad[i], ia->data[i], acc);
                        GradBuf(is.get())[0] += acc;
                      }
                    });
}

Tensor MatMul(const Tensor &a, const Tensor &b) {
  CheckMatrix("matmul", a);
  CheckMatrix("matmul", b);
  if (a.Dim(1) != b.Dim(0))
    throw ValidationError("matmul: inner dimensions disagree, " +
                          ShapeToString(a.Shape()) + " vs " +
                          ShapeToString(b.Shape()));
  const int64_t m = a.Dim(0), k = a.Dim(1), n = b.Dim(1);
  std::vector<double> out(static_cast<size_t>(m * n));
  kern::MatMul(a.Data(), b.Data(), out.data(), m, k, n);
  auto ia = a.Impl(), ib = b.Impl();
  return MakeResult("matmul", {m, n}, std::move(out), {ia, ib},
                    [ia, ib, m, k, n](TensorImpl &o) {
                      if (ia->tracked)
                        kern::MatMulNTAcc(o.grad.data(), ib->data.data(),
                                          GradBuf(ia.get()), m, n, k);
                      if (ib->tracked)
                        kern::MatMulTNAcc(ia->data.data(), o.grad.data(),
                                          GradBuf(ib.get()), m, k, n);
                    });
}

Tensor Transpose(const Tensor &a) {
  CheckMatrix("transpose", a);
  const auto [r, c] = MatDims(a);
  std::vector<double> out(static_cast<size_t>(r * c));
  const double *pa = a.Data();
  ParallelFor(r, [&](int64_t i) {
    for (int64_t j = 0; j < c; j++) out[j * r + i] = pa[i * c + j];
  });
  auto ia = a.Impl();
  return MakeResult("transpose", {c, r}, std::move(out), {ia},
                    [ia, r, c](TensorImpl &o) {
                      if (!ia->tracked) return;
                      double *g = GradBuf(ia.get());
                      for (int64_t i = 0; i < r; i++)
                        for (int64_t j = 0; j < c; j++)
                          g[i * c + j] += o.grad[j * r + i];
                    });
}

namespace {
Tensor ReduceAxis(const char *name, const Tensor &a, int axis, bool mean) {
  if (a.Rank() == 1) {
    if (axis != 0)
      throw ValidationError(std::string(name) + ": axis out of range for shape " +
                            ShapeToString(a.Shape()));
    const int64_t n = a.NumElements();
    double acc = 0.0;
    for (int64_t i = 0; i < n; i++) acc += a.At(i);
    const double scale = mean ? 1.0 / static_cast<double>(n) : 1.0;
    auto ia = a.Impl();
    return MakeResult(name, {}, {acc * scale}, {ia},
                      [ia, n, scale](TensorImpl &o) {
                        if (!ia->tracked) return;
                        double *g = GradBuf(ia.get());
                        const double gv = o.grad[0] * scale;
                        for (int64_t i = 0; i < n; i++) g[i] += gv;
                      });
  }
  CheckMatrix(name, a);
  if (axis != 0 && axis != 1)
    throw ValidationError(std::string(name) + ": axis out of range for shape " +
                          ShapeToString(a.Shape()));
  const auto [r, c] = MatDims(a);
  const double *pa = a.Data();
  if (axis == 0) {
    const double scale = mean ? 1.0 / static_cast<double>(r) : 1.0;
    std::vector<double> out(static_cast<size_t>(c), 0.0);
    for (int64_t i = 0; i < r; i++)
      for (int64_t j = 0; j < c; j++) out[j] += pa[i * c + j];
    for (int64_t j = 0; j < c; j++) out[j] *= scale;
    auto ia = a.Impl();
    return MakeResult(name, {c}, std::move(out), {ia},
                      [ia, r, c, scale](TensorImpl &o) {
                        if (!ia->tracked) return;
                        double *g = GradBuf(ia.get());
                        for (int64_t i = 0; i < r; i++)
                          for (int64_t j = 0; j < c; j++)
                            g[i * c + j] = std::fma(o.grad[j], scale, g[i * c + j]);
                      });
  }
  const double scale = mean ? 1.0 / static_cast<double>(c) : 1.0;
  std::vector<double> out(static_cast<size_t>(r), 0.0);
  ParallelFor(r, [&](int64_t i) {
    double acc = 0.0;
    for (int64_t j = 0; j < c; j++) acc += pa[i * c + j];
    out[i] = acc * scale;
  });
  auto ia = a.Impl();
  return MakeResult(name, {r}, std::move(out), {ia},
                    [ia, r, c, scale](TensorImpl &o) {
                      if (!ia->tracked) return;
                      double *g = GradBuf(ia.get());
                      for (int64_t i = 0; i < r; i++) {
                        const double gv = o.grad[i] * scale;
                        for (int64_t j = 0; j < c; j++) g[i * c + j] += gv;
                      }
                    });
}
}  // namespace

Tensor SumAxis(const Tensor &a, int axis) { return ReduceAxis("sum_axis", a, axis, false); }
Tensor MeanAxis(const Tensor &a, int axis) { return ReduceAxis("mean_axis", a, axis, true); }

Tensor SumAll(const Tensor &a) {
  const int64_t n = a.NumElements();
  double acc = 0.0;
  for (int64_t i = 0; i < n; i++) acc += a.At(i);
  auto ia = a.Impl();
  return MakeResult("sum_all", {}, {acc}, {ia}, [ia, n](TensorImpl &o) {
    if (!ia->tracked) return;
    double *g = GradBuf(ia.get());
    const double gv = o.grad[0];
    for (int64_t i = 0; i < n; i++) g[i] += gv;
  });
}

Tensor MeanAll(const Tensor &a) {
  return ScalarMul(SumAll(a), 1.0 / static_cast<double>(a.NumElements()));
}

namespace {
// Elementwise map with df(x, y) where y is the forward output.
template <typename Fwd, typename Bwd>
Tensor UnaryMap(const char *name, const Tensor &a, Fwd fwd, Bwd dfdx) {
  const int64_t n = a.NumElements();
  std::vector<double> out(static_cast<size_t>(n));
  const double *pa = a.Data();
  ParallelFor(n, [&](int64_t i) { out[i] = fwd(pa[i]); });
  auto ia = a.Impl();
  auto saved = std::make_shared<std::vector<double>>(out);
  return MakeResult(name, a.Shape(), std::move(out), {ia},
                    [ia, saved, dfdx, n](TensorImpl &o) {
                      if (!ia->tracked) return;
                      double *g = GradBuf(ia.get());
                      for (int64_t i = 0; i < n; i++)
                        g[i] = std::fma(o.grad[i], dfdx(ia->data[i], (*saved)[i]), g[i]);
                    });
}
}  // namespace

Tensor Square(const Tensor &a) {
  return UnaryMap("square", a, [](double x) { return x * x; },
                  [](double x, double) { return 2.0 * x; });
}

Tensor Sqrt(const Tensor &a) {
  return UnaryMap("sqrt", a, [](double x) { return std::sqrt(x); },
                  [](double, double y) { return 0.5 / y; });
}

Tensor Exp(const Tensor &a) {
  return UnaryMap("exp", a, [](double x) { return std::exp(x); },
                  [](double, double y) { return y; });
}

Tensor Log(const Tensor &a) {
  return UnaryMap("log", a, [](double x) { return std::log(x); },
                  [](double x, double) { return 1.0 / x; });
}

Tensor Abs(const Tensor &a) {
  return UnaryMap("abs", a, [](double x) { return std::fabs(x); },
                  [](double x, double) { return x < 0.0 ? -1.0 : (x > 0.0 ? 1.0 : 0.0); });
}

Tensor Sigmoid(const Tensor &a) {
  return UnaryMap("sigmoid", a,
                  [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
                  [](double, double y) { return y * (1.0 - y); });
}

Tensor Gelu(const Tensor &a) {
  // Exact erf form; smooth everywhere, so the finite-difference checks see
  // no kinks.
  constexpr double kInvSqrt2 = 0.7071067811865475244;
  constexpr double kInvSqrt2Pi = 0.3989422804014326779;
  return UnaryMap(
      "gelu", a,
      [](double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); },
      [](double x, double) {
        const double phi = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
        return phi + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
      });
}

Tensor Reciprocal(const Tensor &a) {
  return UnaryMap("reciprocal", a, [](double x) { return 1.0 / x; },
                  [](double, double y) { return -y * y; });
}

namespace {
int64_t LastAxis(const Tensor &a) {
  if (a.Rank() == 0)
    throw ValidationError("softmax family: scalar input not supported");
  return a.Shape().back();
}
}  // namespace

Tensor Softmax(const Tensor &a) {
  const int64_t cols = LastAxis(a);
  const int64_t rows = a.NumElements() / cols;
  std::vector<double> out(static_cast<size_t>(a.NumElements()));
  kern::SoftmaxRows(a.Data(), out.data(), rows, cols);
  auto ia = a.Impl();
  auto saved = std::make_shared<std::vector<double>>(out);
  return MakeResult("softmax", a.Shape(), std::move(out), {ia},
                    [ia, saved, rows, cols](TensorImpl &o) {
                      if (!ia->tracked) return;
                      double *g = GradBuf(ia.get());
                      ParallelFor(rows, [&](int64_t i) {
                        const double *p = saved->data() + i * cols;
                        const double *go = o.grad.data() + i * cols;
                        double dot = 0.0;
                        for (int64_t j = 0; j < cols; j++)
                          dot = std::fma(go[j], p[j], dot);
                        for (int64_t j = 0; j < cols; j++)
                          g[i * cols + j] += p[j] * (go[j] - dot);
                      });
                    });
}

Tensor LogSoftmax(const Tensor &a) {
  const int64_t cols = LastAxis(a);
  const int64_t rows = a.NumElements() / cols;
  std::vector<double> out(static_cast<size_t>(a.NumElements()));
  kern::LogSoftmaxRows(a.Data(), out.data(), rows, cols);
  auto ia = a.Impl();
  auto saved = std::make_shared<std::vector<double>>(out);
  return MakeResult("log_softmax", a.Shape(), std::move(out), {ia},
                    [ia, saved, rows, cols](TensorImpl &o) {
                      if (!ia->tracked) return;
                      double *g = GradBuf(ia.get());
                      ParallelFor(rows, [&](int64_t i) {
                        const double *lp = saved->data() + i * cols;
                        const double *go = o.grad.data() + i * cols;
                        double sum = 0.0;
                        for (int64_t j = 0; j < cols; j++) sum += go[j];
                        for (int64_t j = 0; j < cols; j++)
                          g[i * cols + j] += go[j] - std::exp(lp[j]) * sum;
                      });
                    });
}

Tensor LayerNorm(const Tensor &a, double eps) {
  const int64_t cols = LastAxis(a);
  const int64_t rows = a.NumElements() / cols;
  std::vector<double> out(static_cast<size_t>(a.NumElements()));
  auto mean = std::make_shared<std::vector<double>>(static_cast<size_t>(rows));
  auto rstd = std::make_shared<std::vector<double>>(static_cast<size_t>(rows));
  kern::LayerNormRows(a.Data(), out.data(), mean->data(), rstd->data(), rows,
                      cols, eps);
  auto ia = a.Impl();
  auto saved = std::make_shared<std::vector<double>>(out);
  return MakeResult("layer_norm", a.Shape(), std::move(out), {ia},
                    [ia, saved, rstd, rows, cols](TensorImpl &o) {
                      if (!ia->tracked) return;
                      double *g = GradBuf(ia.get());
                      ParallelFor(rows, [&](int64_t i) {
                        const double *xh = saved->data() + i * cols;
                        const double *go = o.grad.data() + i * cols;
                        const double rs = (*rstd)[i];
                        double gsum = 0.0, gxh = 0.0;
                        for (int64_t j = 0; j < cols; j++) {
                          gsum += go[j];
                          gxh = std::fma(go[j], xh[j], gxh);
                        }
                        const double inv = 1.0 / static_cast<double>(cols);
                        for (int64_t j = 0; j < cols; j++)
                          g[i * cols + j] +=
                              rs * (go[j] - gsum * inv - xh[j] * gxh * inv);
                      });
                    });
}

Tensor L1Norm(const Tensor &a) {
  const int64_t n = a.NumElements();
  double acc = 0.0;
  for (int64_t i = 0; i < n; i++) acc += std::fabs(a.At(i));
  auto ia = a.Impl();
  return MakeResult("l1_norm", {}, {acc}, {ia}, [ia, n](TensorImpl &o) {
    if (!ia->tracked) return;
    double *g = GradBuf(ia.get());
    const double gv = o.grad[0];
    for (int64_t i = 0; i < n; i++) {
      const double x = ia->data[i];
      g[i] += gv * (x < 0.0 ? -1.0 : (x > 0.0 ? 1.0 : 0.0));
    }
  });
}

Tensor L2Norm(const Tensor &a) {
  const int64_t n = a.NumElements();
  double acc = 0.0;
  for (int64_t i = 0; i < n; i++) acc = std::fma(a.At(i), a.At(i), acc);
  const double norm = std::sqrt(acc);
  auto ia = a.Impl();
  return MakeResult("l2_norm", {}, {norm}, {ia}, [ia, n, norm](TensorImpl &o) {
    if (!ia->tracked) return;
    const double denom = norm > 1e-300 ? norm : 1e-300;
    double *g = GradBuf(ia.get());
    const double gv = o.grad[0] / denom;
    for (int64_t i = 0; i < n; i++) g[i] = std::fma(gv, ia->data[i], g[i]);
  });
}

Tensor CosineRows(const Tensor &a, const Tensor &b, double eps) {
  CheckSameShape("cosine_rows", a, b);
  const bool vector_input = a.Rank() == 1;
  const int64_t cols = vector_input ? a.NumElements() : a.Shape().back();
  const int64_t rows = a.NumElements() / cols;
  std::vector<double> out(static_cast<size_t>(rows));
  auto na = std::make_shared<std::vector<double>>(static_cast<size_t>(rows));
  auto nb = std::make_shared<std::vector<double>>(static_cast<size_t>(rows));
  const double *pa = a.Data(), *pb = b.Data();
  ParallelFor(rows, [&](int64_t i) {
    double aa = 0.0, bb = 0.0, ab = 0.0;
    for (int64_t j = 0; j < cols; j++) {
      const double av = pa[i * cols + j], bv = pb[i * cols + j];
      aa = std::fma(av, av, aa);
      bb = std::fma(bv, bv, bb);
      ab = std::fma(av, bv, ab);
    }
    const double ga = std::max(std::sqrt(aa), eps);
    const double gb = std::max(std::sqrt(bb), eps);
    (*na)[i] = ga;
    (*nb)[i] = gb;
    out[i] = ab / (ga * gb);
  });
  auto ia = a.Impl(), ib = b.Impl();
  std::vector<int64_t> out_shape = vector_input ? std::vector<int64_t>{}
                                                : std::vector<int64_t>{rows};
  auto saved = std::make_shared<std::vector<double>>(out);
  return MakeResult(
      "cosine_rows", std::move(out_shape), std::move(out), {ia, ib},
      [ia, ib, na, nb, saved, rows, cols, eps](TensorImpl &o) {
        ParallelFor(rows, [&](int64_t i) {
          const double gv = o.grad[i];
          if (gv == 0.0) return;
          const double ga = (*na)[i], gb = (*nb)[i];
          const double cosv = (*saved)[i];
          const double inv = 1.0 / (ga * gb);
          // When the guard clamps a norm, that factor is a constant and its
          // direction term drops out.
          const bool a_live = ga > eps;
          const bool b_live = gb > eps;
          for (int64_t j = 0; j < cols; j++) {
            const double av = ia->data[i * cols + j];
            const double bv = ib->data[i * cols + j];
            if (ia->tracked) {
              double d = bv * inv;
              if (a_live) d -= cosv * av / (ga * ga);
              GradBuf(ia.get())[i * cols + j] += gv * d;
            }
            if (ib->tracked) {
              double d = av * inv;
              if (b_live) d -= cosv * bv / (gb * gb);
              GradBuf(ib.get())[i * cols + j] += gv * d;
            }
          }
        });
      });
}

Tensor Concat(const Tensor &a, const Tensor &b, int axis) {
  if (a.Rank() != b.Rank())
    throw ValidationError("concat: rank mismatch " + ShapeToString(a.Shape()) +
                          " vs " + ShapeToString(b.Shape()));
  if (a.Rank() == 1) {
    if (axis != 0) throw ValidationError("concat: axis out of range for vectors");
    const int64_t n1 = a.NumElements(), n2 = b.NumElements();
    std::vector<double> out(static_cast<size_t>(n1 + n2));
    std::memcpy(out.data(), a.Data(), sizeof(double) * n1);
    std::memcpy(out.data() + n1, b.Data(), sizeof(double) * n2);
    auto ia = a.Impl(), ib = b.Impl();
    return MakeResult("concat", {n1 + n2}, std::move(out), {ia, ib},
                      [ia, ib, n1, n2](TensorImpl &o) {
                        AccumulateInto(ia, o.grad.data(), n1);
                        AccumulateInto(ib, o.grad.data() + n1, n2);
                      });
  }
  CheckMatrix("concat", a);
  CheckMatrix("concat", b);
  if (axis == 0) {
    if (a.Dim(1) != b.Dim(1))
      throw ValidationError("concat: column mismatch " + ShapeToString(a.Shape()) +
                            " vs " + ShapeToString(b.Shape()));
    const int64_t r1 = a.Dim(0), r2 = b.Dim(0), c = a.Dim(1);
    std::vector<double> out(static_cast<size_t>((r1 + r2) * c));
    std::memcpy(out.data(), a.Data(), sizeof(double) * r1 * c);
    std::memcpy(out.data() + r1 * c, b.Data(), sizeof(double) * r2 * c);
    auto ia = a.Impl(), ib = b.Impl();
    return MakeResult("concat", {r1 + r2, c}, std::move(out), {ia, ib},
                      [ia, ib, r1, r2, c](TensorImpl &o) {
                        AccumulateInto(ia, o.grad.data(), r1 * c);
                        AccumulateInto(ib, o.grad.data() + r1 * c, r2 * c);
                      });
  }
  if (axis != 1) throw ValidationError("concat: axis out of range for matrices");
  if (a.Dim(0) != b.Dim(0))
    throw ValidationError("concat: row mismatch " + ShapeToString(a.Shape()) +
                          " vs " + ShapeToString(b.Shape()));
  const int64_t r = a.Dim(0), c1 = a.Dim(1), c2 = b.Dim(1);
  std::vector<double> out(static_cast<size_t>(r * (c1 + c2)));
  for (int64_t i = 0; i < r; i++) {
    std::memcpy(out.data() + i * (c1 + c2), a.Data() + i * c1, sizeof(double) * c1);
    std::memcpy(out.data() + i * (c1 + c2) + c1, b.Data() + i * c2, sizeof(double) * c2);
  }
  auto ia = a.Impl(), ib = b.Impl();
  return MakeResult("concat", {r, c1 + c2}, std::move(out), {ia, ib},
                    [ia, ib, r, c1, c2](TensorImpl &o) {
                      const int64_t c = c1 + c2;
                      if (ia->tracked) {
                        double *g = GradBuf(ia.get());
                        for (int64_t i = 0; i < r; i++)
                          for (int64_t j = 0; j < c1; j++)
                            g[i * c1 + j] += o.grad[i * c + j];
                      }
                      if (ib->tracked) {
                        double *g = GradBuf(ib.get());
                        for (int64_t i = 0; i < r; i++)
                          for (int64_t j = 0; j < c2; j++)
                            g[i * c2 + j] += o.grad[i * c + c1 + j];
                      }
                    });
}

Tensor Slice(const Tensor &a, int axis, int64_t start, int64_t len) {
  if (a.Rank() == 1) {
    if (axis != 0) throw ValidationError("slice: axis out of range for vectors");
    if (start < 0 || len < 0 || start + len > a.NumElements())
      throw ValidationError("slice: range out of bounds for shape " +
                            ShapeToString(a.Shape()));
    std::vector<double> out(a.Data() + start, a.Data() + start + len);
    auto ia = a.Impl();
    return MakeResult("slice", {len}, std::move(out), {ia},
                      [ia, start, len](TensorImpl &o) {
                        if (!ia->tracked) return;
                        double *g = GradBuf(ia.get());
                        for (int64_t i = 0; i < len; i++) g[start + i] += o.grad[i];
                      });
  }
  CheckMatrix("slice", a);
  const auto [r, c] = MatDims(a);
  if (axis == 0) {
    if (start < 0 || len < 0 || start + len > r)
      throw ValidationError("slice: row range out of bounds for shape " +
                            ShapeToString(a.Shape()));
    std::vector<double> out(a.Data() + start * c, a.Data() + (start + len) * c);
    auto ia = a.Impl();
    return MakeResult("slice", {len, c}, std::move(out), {ia},
                      [ia, start, len, c](TensorImpl &o) {
                        if (!ia->tracked) return;
                        double *g = GradBuf(ia.get());
                        for (int64_t i = 0; i < len * c; i++)
                          g[start * c + i] += o.grad[i];
                      });
  }
  if (axis != 1) throw ValidationError("slice: axis out of range for matrices");
  if (start < 0 || len < 0 || start + len > c)
    throw ValidationError("slice: column range out of bounds for shape " +
                          ShapeToString(a.Shape()));
  std::vector<double> out(static_cast<size_t>(r * len));
  for (int64_t i = 0; i < r; i++)
    std::memcpy(out.data() + i * len, a.Data() + i * c + start, sizeof(double) * len);
  auto ia = a.Impl();
  return MakeResult("slice", {r, len}, std::move(out), {ia},
                    [ia, r, c, start, len](TensorImpl &o) {
                      if (!ia->tracked) return;
                      double *g = GradBuf(ia.get());
                      for (int64_t i = 0; i < r; i++)
                        for (int64_t j = 0; j < len; j++)
                          g[i * c + start + j] += o.grad[i * len + j];
                    });
}

Tensor StopGradient(const Tensor &a) {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = a.Shape();
  impl->data = std::vector<double>(a.Data(), a.Data() + a.NumElements());
  return Tensor(std::move(impl));
}

Tensor AddRowwise(const Tensor &m, const Tensor &v) {
  CheckMatrix("add_rowwise", m);
  if (v.Rank() != 1 || v.NumElements() != m.Dim(1))
    throw ValidationError("add_rowwise: vector shape " + ShapeToString(v.Shape()) +
                          " does not match matrix " + ShapeToString(m.Shape()));
  const auto [r, c] = MatDims(m);
  std::vector<double> out(static_cast<size_t>(r * c));
  const double *pm = m.Data(), *pv = v.Data();
  ParallelFor(r, [&](int64_t i) {
    for (int64_t j = 0; j < c; j++) out[i * c + j] = pm[i * c + j] + pv[j];
  });
  auto im = m.Impl(), iv = v.Impl();
  return MakeResult("add_rowwise", {r, c}, std::move(out), {im, iv},
                    [im, iv, r, c](TensorImpl &o) {
                      AccumulateInto(im, o.grad.data(), r * c);
                      if (iv->tracked) {
                        double *g = GradBuf(iv.get());
                        for (int64_t i = 0; i < r; i++)
                          for (int64_t j = 0; j < c; j++) g[j] += o.grad[i * c + j];
                      }
                    });
}

Tensor ScaleColumns(const Tensor &m, const Tensor &v) {
  CheckMatrix("scale_columns", m);
  if (v.Rank() != 1 || v.NumElements() != m.Dim(1))
    throw ValidationError("scale_columns: vector shape " + ShapeToString(v.Shape()) +
                          " does not match matrix " + ShapeToString(m.Shape()));
  const auto [r, c] = MatDims(m);
  std::vector<double> out(static_cast<size_t>(r * c));
  const double *pm = m.Data(), *pv = v.Data();
  ParallelFor(r, [&](int64_t i) {
    for (int64_t j = 0; j < c; j++) out[i * c + j] = pm[i * c + j] * pv[j];
  });
  auto im = m.Impl(), iv = v.Impl();
  return MakeResult("scale_columns", {r, c}, std::move(out), {im, iv},
                    [im, iv, r, c](TensorImpl &o) {
                      if (im->tracked) {
                        double *g = GradBuf(im.get());
                        for (int64_t i = 0; i < r; i++)
                          for (int64_t j = 0; j < c; j++)
                            g[i * c + j] = std::fma(o.grad[i * c + j],
                                                    iv->data[j], g[i * c + j]);
                      }
                      if (iv->tracked) {
                        double *g = GradBuf(iv.get());
                        for (int64_t i = 0; i < r; i++)
                          for (int64_t j = 0; j < c; j++)
                            g[j] = std::fma(o.grad[i * c + j],
                                            im->data[i * c + j], g[j]);
                      }
                    });
}

Tensor ScaleRows(const Tensor &m, const Tensor &u) {
  CheckMatrix("scale_rows", m);
  if (u.Rank() != 1 || u.NumElements() != m.Dim(0))
    throw ValidationError("scale_rows: vector shape " + ShapeToString(u.Shape()) +
                          " does not match matrix " + ShapeToString(m.Shape()));
  const auto [r, c] = MatDims(m);
  std::vector<double> out(static_cast<size_t>(r * c));
  const double *pm = m.Data(), *pu = u.Data();
  ParallelFor(r, [&](int64_t i) {
    for (int64_t j = 0; j < c; j++) out[i * c + j] = pm[i * c + j] * pu[i];
  });
  auto im = m.Impl(), iu = u.Impl();
  return MakeResult("scale_rows", {r, c}, std::move(out), {im, iu},
                    [im, iu, r, c](TensorImpl &o) {
                      if (im->tracked) {
                        double *g = GradBuf(im.get());
                        for (int64_t i = 0; i < r; i++)
                          for (int64_t j = 0; j < c; j++)
                            g[i * c + j] = std::fma(o.grad[i * c + j],
                                                    iu->data[i], g[i * c + j]);
                      }
                      if (iu->tracked) {
                        double *g = GradBuf(iu.get());
                        for (int64_t i = 0; i < r; i++) {
                          double acc = 0.0;
                          for (int64_t j = 0; j < c; j++)
                            acc = std::fma(o.grad[i * c + j],
                                           im->data[i * c + j], acc);
                          g[i] += acc;
                        }
                      }
                    });
}

Tensor Reshape(const Tensor &a, std::vector<int64_t> shape) {
  if (NumElementsOfShape(shape) != a.NumElements())
    throw ValidationError("reshape: element count mismatch, " +
                          ShapeToString(a.Shape()) + " to " + ShapeToString(shape));
  const int64_t n = a.NumElements();
  std::vector<double> out(a.Data(), a.Data() + n);
  auto ia = a.Impl();
  return MakeResult("reshape", std::move(shape), std::move(out), {ia},
                    [ia, n](TensorImpl &o) { AccumulateInto(ia, o.grad.data(), n); });
}

Tensor GatherRows(const Tensor &m, const std::vector<int64_t> &rows) {
  CheckMatrix("gather_rows", m);
  const auto [r, c] = MatDims(m);
  for (int64_t idx : rows)
    if (idx < 0 || idx >= r)
      throw ValidationError("gather_rows: index " + std::to_string(idx) +
                            " out of range for shape " + ShapeToString(m.Shape()));
  const int64_t k = static_cast<int64_t>(rows.size());
  std::vector<double> out(static_cast<size_t>(k * c));
  for (int64_t i = 0; i < k; i++)
    std::memcpy(out.data() + i * c, m.Data() + rows[i] * c, sizeof(double) * c);
  auto im = m.Impl();
  auto idx = std::make_shared<std::vector<int64_t>>(rows);
  return MakeResult("gather_rows", {k, c}, std::move(out), {im},
                    [im, idx, c](TensorImpl &o) {
                      if (!im->tracked) return;
                      double *g = GradBuf(im.get());
                      for (size_t i = 0; i < idx->size(); i++)
                        for (int64_t j = 0; j < c; j++)
                          g[(*idx)[i] * c + j] += o.grad[i * c + j];
                    });
}

Tensor RepeatInterleaveRows(const Tensor &m, int64_t n) {
  CheckMatrix("repeat_rows", m);
  if (n < 1) throw ValidationError("repeat_rows: repeat count must be >= 1");
  const auto [r, c] = MatDims(m);
  std::vector<double> out(static_cast<size_t>(r * n * c));
  for (int64_t i = 0; i < r; i++)
    for (int64_t t = 0; t < n; t++)
      std::memcpy(out.data() + (i * n + t) * c, m.Data() + i * c, sizeof(double) * c);
  auto im = m.Impl();
  return MakeResult("repeat_rows", {r * n, c}, std::move(out), {im},
                    [im, r, c, n](TensorImpl &o) {
                      if (!im->tracked) return;
                      double *g = GradBuf(im.get());
                      for (int64_t i = 0; i < r; i++)
                        for (int64_t t = 0; t < n; t++)
                          for (int64_t j = 0; j < c; j++)
                            g[i * c + j] += o.grad[(i * n + t) * c + j];
                    });
}

Tensor ReplaceRows(const Tensor &m, const std::vector<int64_t> &rows,
                   const Tensor &v) {
  CheckMatrix("replace_rows", m);
  if (v.Rank() != 1 || v.NumElements() != m.Dim(1))
    throw ValidationError("replace_rows: vector shape " + ShapeToString(v.Shape()) +
                          " does not match matrix " + ShapeToString(m.Shape()));
  const auto [r, c] = MatDims(m);
  std::vector<char> replaced(static_cast<size_t>(r), 0);
  for (int64_t idx : rows) {
    if (idx < 0 || idx >= r)
      throw ValidationError("replace_rows: index " + std::to_string(idx) +
                            " out of range for shape " + ShapeToString(m.Shape()));
    replaced[static_cast<size_t>(idx)] = 1;
  }
  std::vector<double> out(m.Data(), m.Data() + r * c);
  for (int64_t i = 0; i < r; i++)
    if (replaced[static_cast<size_t>(i)])
      std::memcpy(out.data() + i * c, v.Data(), sizeof(double) * c);
  auto im = m.Impl(), iv = v.Impl();
  auto mask = std::make_shared<std::vector<char>>(std::move(replaced));
  return MakeResult("replace_rows", {r, c}, std::move(out), {im, iv},
                    [im, iv, mask, r, c](TensorImpl &o) {
                      if (im->tracked) {
                        double *g = GradBuf(im.get());
                        for (int64_t i = 0; i < r; i++) {
                          if ((*mask)[static_cast<size_t>(i)]) continue;
                          for (int64_t j = 0; j < c; j++)
                            g[i * c + j] += o.grad[i * c + j];
                        }
                      }
                      if (iv->tracked) {
                        double *g = GradBuf(iv.get());
                        for (int64_t i = 0; i < r; i++) {
                          if (!(*mask)[static_cast<size_t>(i)]) continue;
                          for (int64_t j = 0; j < c; j++) g[j] += o.grad[i * c + j];
                        }
                      }
                    });
}

namespace {
void CheckOffsets(const char *op, const std::vector<int64_t> &offsets,
                  int64_t rows) {
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != rows)
    throw ValidationError(std::string(op) + ": bad segment offsets");
  for (size_t i = 0; i + 1 < offsets.size(); i++)
    if (offsets[i] >= offsets[i + 1])
      throw ValidationError(std::string(op) + ": empty or unordered segment");
}
}  // namespace

Tensor Conv1dPacked(const Tensor &x, const Tensor &w, const Tensor &bias,
                    const std::vector<int64_t> &offsets) {
  CheckMatrix("conv1d", x);
  if (w.Rank() != 3)
    throw ValidationError("conv1d: weight must be [cout,cin,k], got shape " +
                          ShapeToString(w.Shape()));
  const int64_t rows = x.Dim(0), cin = x.Dim(1);
  const int64_t cout = w.Dim(0), ksize = w.Dim(2);
  if (w.Dim(1) != cin)
    throw ValidationError("conv1d: cin mismatch, input " + ShapeToString(x.Shape()) +
                          " vs weight " + ShapeToString(w.Shape()));
  if (bias.Rank() != 1 || bias.NumElements() != cout)
    throw ValidationError("conv1d: bias shape " + ShapeToString(bias.Shape()) +
                          " does not match cout " + std::to_string(cout));
  CheckOffsets("conv1d", offsets, rows);
  std::vector<double> out(static_cast<size_t>(rows * cout));
  kern::Conv1dForward(x.Data(), w.Data(), bias.Data(), out.data(), offsets, cin,
                      cout, ksize);
  auto ix = x.Impl(), iw = w.Impl(), ib = bias.Impl();
  auto offs = std::make_shared<std::vector<int64_t>>(offsets);
  return MakeResult("conv1d", {rows, cout}, std::move(out), {ix, iw, ib},
                    [ix, iw, ib, offs, cin, cout, ksize](TensorImpl &o) {
                      kern::Conv1dBackward(
                          ix->data.data(), iw->data.data(), o.grad.data(),
                          ix->tracked ? GradBuf(ix.get()) : nullptr,
                          iw->tracked ? GradBuf(iw.get()) : nullptr,
                          ib->tracked ? GradBuf(ib.get()) : nullptr, *offs, cin,
                          cout, ksize);
                    });
}

Tensor AttentionPacked(const Tensor &q, const Tensor &k, const Tensor &v,
                       const std::vector<int64_t> &offsets, int64_t heads) {
  CheckMatrix("attention", q);
  CheckSameShape("attention", q, k);
  CheckSameShape("attention", q, v);
  const int64_t rows = q.Dim(0), dim = q.Dim(1);
  if (heads < 1 || dim % heads != 0)
    throw ValidationError("attention: dim " + std::to_string(dim) +
                          " not divisible by heads " + std::to_string(heads));
  CheckOffsets("attention", offsets, rows);
  std::vector<double> out(static_cast<size_t>(rows * dim));
  auto probs = std::make_shared<std::vector<double>>(
      static_cast<size_t>(kern::AttentionProbsSize(offsets, heads)));
  kern::AttentionForward(q.Data(), k.Data(), v.Data(), out.data(),
                         probs->data(), offsets, dim, heads);
  auto iq = q.Impl(), ik = k.Impl(), iv = v.Impl();
  auto offs = std::make_shared<std::vector<int64_t>>(offsets);
  return MakeResult("attention", {rows, dim}, std::move(out), {iq, ik, iv},
                    [iq, ik, iv, probs, offs, dim, heads](TensorImpl &o) {
                      kern::AttentionBackward(
                          iq->data.data(), ik->data.data(), iv->data.data(),
                          probs->data(), o.grad.data(), GradBuf(iq.get()),
                          GradBuf(ik.get()), GradBuf(iv.get()), *offs, dim,
                          heads);
                    });
}

Tensor SegmentMean(const Tensor &x, const std::vector<int64_t> &offsets) {
  CheckMatrix("segment_mean", x);
  const int64_t rows = x.Dim(0), c = x.Dim(1);
  CheckOffsets("segment_mean", offsets, rows);
  const int64_t segs = static_cast<int64_t>(offsets.size()) - 1;
  std::vector<double> out(static_cast<size_t>(segs * c), 0.0);
  const double *px = x.Data();
  ParallelFor(segs, [&](int64_t s) {
    const double inv = 1.0 / static_cast<double>(offsets[s + 1] - offsets[s]);
    for (int64_t r = offsets[s]; r < offsets[s + 1]; r++)
      for (int64_t j = 0; j < c; j++) out[s * c + j] += px[r * c + j];
    for (int64_t j = 0; j < c; j++) out[s * c + j] *= inv;
  });
  auto ix = x.Impl();
  auto offs = std::make_shared<std::vector<int64_t>>(offsets);
  return MakeResult("segment_mean", {segs, c}, std::move(out), {ix},
                    [ix, offs, c](TensorImpl &o) {
                      if (!ix->tracked) return;
                      double *g = GradBuf(ix.get());
                      const int64_t segs = static_cast<int64_t>(offs->size()) - 1;
                      ParallelFor(segs, [&](int64_t s) {
                        const double inv =
                            1.0 / static_cast<double>((*offs)[s + 1] - (*offs)[s]);
                        for (int64_t r = (*offs)[s]; r < (*offs)[s + 1]; r++)
                          for (int64_t j = 0; j < c; j++)
                            g[r * c + j] = std::fma(o.grad[s * c + j], inv,
                                                    g[r * c + j]);
                      });
                    });
}

Tensor BceWithLogits(const Tensor &logits, const Tensor &targets) {
  CheckSameShape("bce_with_logits", logits, targets);
  const int64_t n = logits.NumElements();
  if (n == 0) throw ValidationError("bce_with_logits: empty input");
  double acc = 0.0;
  const double *z = logits.Data(), *y = targets.Data();
  for (int64_t i = 0; i < n; i++) {
    // max(z,0) - z*y + log(1 + exp(-|z|))
    acc += std::max(z[i], 0.0) - z[i] * y[i] + std::log1p(std::exp(-std::fabs(z[i])));
  }
  const double inv = 1.0 / static_cast<double>(n);
  auto il = logits.Impl(), it = targets.Impl();
  return MakeResult("bce_with_logits", {}, {acc * inv}, {il, it},
                    [il, it, n, inv](TensorImpl &o) {
                      if (!il->tracked) return;
                      double *g = GradBuf(il.get());
                      const double gv = o.grad[0] * inv;
                      for (int64_t i = 0; i < n; i++) {
                        const double sig = 1.0 / (1.0 + std::exp(-il->data[i]));
                        g[i] += gv * (sig - it->data[i]);
                      }
                    });
}

}  // namespace ops
}  // namespace kwsd
