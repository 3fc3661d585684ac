// tensor/kernels.h

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

#ifndef KWSD_TENSOR_KERNELS_H_
#define KWSD_TENSOR_KERNELS_H_

#include <cstdint>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace kwsd {

// Every parallel kernel assigns each output element to exactly one thread and
// accumulates that element in a fixed serial order, so results are
// bit-identical to the serial references at any thread count. Inner products
// use std::fma in both paths; a contracted fused multiply-add rounds once,
// and letting the compiler decide where to contract would break the
// serial/parallel equivalence.
//
// Whole-tensor scalar reductions stay serial; they are O(n) and cheap next to
// the matrix work.

void SetParallelEnabled(bool enabled);
bool ParallelEnabled();

template <typename F>
inline void ParallelFor(int64_t n, const F &f) {
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) if (ParallelEnabled() && n > 1)
  for (int64_t i = 0; i < n; i++) f(i);
#else
  for (int64_t i = 0; i < n; i++) f(i);
#endif
}

namespace kern {

// c[m,n] = a[m,k] * b[k,n]
void MatMul(const double *a, const double *b, double *c, int64_t m, int64_t k,
            int64_t n);
// c[m,n] += a[m,k] * b[k,n]
void MatMulAcc(const double *a, const double *b, double *c, int64_t m,
               int64_t k, int64_t n);
// c[m,n] += a[m,k] * b[n,k]^T   (c_ij = sum_k a_ik b_jk)
void MatMulNTAcc(const double *a, const double *b, double *c, int64_t m,
                 int64_t k, int64_t n);
// c[k,n] += a[m,k]^T * b[m,n]   (c_ij = sum_m a_mi b_mj)
void MatMulTNAcc(const double *a, const double *b, double *c, int64_t m,
                 int64_t k, int64_t n);

// Naive triple-loop references, same per-element accumulation order.
void MatMulSerial(const double *a, const double *b, double *c, int64_t m,
                  int64_t k, int64_t n);
void MatMulAccSerial(const double *a, const double *b, double *c, int64_t m,
                     int64_t k, int64_t n);
void MatMulNTAccSerial(const double *a, const double *b, double *c, int64_t m,
                       int64_t k, int64_t n);
void MatMulTNAccSerial(const double *a, const double *b, double *c, int64_t m,
                       int64_t k, int64_t n);

// 1-D convolution over the time axis of a packed batch, stride 1, zero
// padding confined to each segment. x[rows,cin], w[cout,cin,ksize],
// bias[cout], y[rows,cout]. offsets has num_segments+1 entries.
void Conv1dForward(const double *x, const double *w, const double *bias,
                   double *y, const std::vector<int64_t> &offsets, int64_t cin,
                   int64_t cout, int64_t ksize);
void Conv1dBackward(const double *x, const double *w, const double *dy,
                    double *dx, double *dw, double *dbias,
                    const std::vector<int64_t> &offsets, int64_t cin,
                    int64_t cout, int64_t ksize);
void Conv1dForwardSerial(const double *x, const double *w, const double *bias,
                         double *y, const std::vector<int64_t> &offsets,
                         int64_t cin, int64_t cout, int64_t ksize);

// Multi-head scaled dot-product self-attention over packed segments.
// q,k,v,ctx are [rows,dim]; probs must hold sum_i heads*T_i*T_i doubles and
// is saved for the backward pass.
void AttentionForward(const double *q, const double *k, const double *v,
                      double *ctx, double *probs,
                      const std::vector<int64_t> &offsets, int64_t dim,
                      int64_t heads);
void AttentionBackward(const double *q, const double *k, const double *v,
                       const double *probs, const double *dctx, double *dq,
                       double *dk, double *dv,
                       const std::vector<int64_t> &offsets, int64_t dim,
                       int64_t heads);
void AttentionForwardSerial(const double *q, const double *k, const double *v,
                            double *ctx, double *probs,
                            const std::vector<int64_t> &offsets, int64_t dim,
                            int64_t heads);
int64_t AttentionProbsSize(const std::vector<int64_t> &offsets, int64_t heads);

// Row-wise softmax / log-softmax over the last axis, numerically shifted.
void SoftmaxRows(const double *x, double *y, int64_t rows, int64_t cols);
void LogSoftmaxRows(const double *x, double *y, int64_t rows, int64_t cols);
void SoftmaxRowsSerial(const double *x, double *y, int64_t rows, int64_t cols);

// Row-wise layer normalization; mean/rstd saved per row for the backward.
void LayerNormRows(const double *x, double *y, double *mean, double *rstd,
                   int64_t rows, int64_t cols, double eps);
void LayerNormRowsSerial(const double *x, double *y, double *mean,
                         double *rstd, int64_t rows, int64_t cols, double eps);

}  // namespace kern
}  // namespace kwsd

#endif  // KWSD_TENSOR_KERNELS_H_
