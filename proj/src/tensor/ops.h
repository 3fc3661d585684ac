// tensor/ops.h

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

#ifndef KWSD_TENSOR_OPS_H_
#define KWSD_TENSOR_OPS_H_

#include <cstdint>
#include <vector>

#include "tensor/tensor.h"

namespace kwsd {
namespace ops {

// Elementwise; shapes must match exactly. No broadcasting except the
// explicit scalar and row/column forms below, so every backward rule stays
// a few lines of auditable code.
Tensor Add(const Tensor &a, const Tensor &b);
Tensor Sub(const Tensor &a, const Tensor &b);
Tensor Mul(const Tensor &a, const Tensor &b);

Tensor ScalarMul(const Tensor &a, double c);
Tensor ScalarAdd(const Tensor &a, double c);
// Elementwise multiply by a rank-0 tensor; gradient flows to both sides.
Tensor MulScalarTensor(const Tensor &a, const Tensor &s);

Tensor MatMul(const Tensor &a, const Tensor &b);
Tensor Transpose(const Tensor &a);

// axis 0 or 1 on matrices, 0 on vectors. Reducing a vector yields a scalar.
Tensor SumAxis(const Tensor &a, int axis);
Tensor MeanAxis(const Tensor &a, int axis);
Tensor SumAll(const Tensor &a);
Tensor MeanAll(const Tensor &a);

Tensor Square(const Tensor &a);
Tensor Sqrt(const Tensor &a);
Tensor Exp(const Tensor &a);
Tensor Log(const Tensor &a);
Tensor Abs(const Tensor &a);
Tensor Sigmoid(const Tensor &a);
Tensor Gelu(const Tensor &a);
Tensor Reciprocal(const Tensor &a);

// Over the last axis.
Tensor Softmax(const Tensor &a);
Tensor LogSoftmax(const Tensor &a);
Tensor LayerNorm(const Tensor &a, double eps);

Tensor L1Norm(const Tensor &a);
Tensor L2Norm(const Tensor &a);

// Row-by-row cosine between two matrices of identical shape (vectors count
// as a single row; the result is then a scalar). Each norm factor in the
// denominator is guarded as max(norm, eps) so zero vectors yield cosine 0
// instead of a failure, and the guard is exactly inactive on healthy inputs.
Tensor CosineRows(const Tensor &a, const Tensor &b, double eps);

Tensor Concat(const Tensor &a, const Tensor &b, int axis);
Tensor Slice(const Tensor &a, int axis, int64_t start, int64_t len);
// Identity forward (bitwise), zero gradient upstream.
Tensor StopGradient(const Tensor &a);

// m: [r,c], v: [c]. Adds v to every row.
Tensor AddRowwise(const Tensor &m, const Tensor &v);
// m: [r,c], v: [c]. Scales column j by v[j].
Tensor ScaleColumns(const Tensor &m, const Tensor &v);
// m: [r,c], u: [r]. Scales row i by u[i].
Tensor ScaleRows(const Tensor &m, const Tensor &u);

Tensor Reshape(const Tensor &a, std::vector<int64_t> shape);
Tensor GatherRows(const Tensor &m, const std::vector<int64_t> &rows);
// Copies of each row, n times, in row order: a0,a0,..,a1,a1,..
Tensor RepeatInterleaveRows(const Tensor &m, int64_t n);
// Rows in `rows` replaced by v (shape [c]); used for span masking.
Tensor ReplaceRows(const Tensor &m, const std::vector<int64_t> &rows,
                   const Tensor &v);

// Packed-segment ops; `offsets` has one entry per segment boundary
// (num_segments+1, starting at 0, ending at the packed row count).
Tensor Conv1dPacked(const Tensor &x, const Tensor &w, const Tensor &bias,
                    const std::vector<int64_t> &offsets);
Tensor AttentionPacked(const Tensor &q, const Tensor &k, const Tensor &v,
                       const std::vector<int64_t> &offsets, int64_t heads);
Tensor SegmentMean(const Tensor &x, const std::vector<int64_t> &offsets);

// Mean over elements of the numerically stable binary cross-entropy with
// logits; targets are constants in {0,1}.
Tensor BceWithLogits(const Tensor &logits, const Tensor &targets);

}  // namespace ops
}  // namespace kwsd

#endif  // KWSD_TENSOR_OPS_H_
