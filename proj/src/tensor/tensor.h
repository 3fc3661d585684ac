// tensor/tensor.h

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

#ifndef KWSD_TENSOR_TENSOR_H_
#define KWSD_TENSOR_TENSOR_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "base/common.h"
#include "base/rng.h"

namespace kwsd {

// Dense row-major f64 tensor with reverse-mode autodiff. A Tensor is a
// cheap handle; copies alias the same storage and graph record. Ops run
// eagerly and record a backward closure when gradients can flow to them.
//
// Scalars are rank 0 (empty shape, one element).
//
// Gradients accumulate: Backward() adds into parameter .grad buffers and the
// caller zeroes them explicitly between steps. Gradients of interior nodes
// are scratch and reset on every Backward() call.

struct TensorImpl;

struct OpNode {
  const char *name;
  std::vector<std::shared_ptr<TensorImpl>> inputs;
  std::function<void(TensorImpl &out)> backward;
};

struct TensorImpl {
  std::vector<int64_t> shape;
  std::vector<double> data;
  std::vector<double> grad;     // empty until first needed
  bool requires_grad = false;   // leaf parameter
  bool tracked = false;         // gradient flows through this value
  std::shared_ptr<OpNode> node; // null for leaves and constants
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}

  static Tensor Zeros(std::vector<int64_t> shape);
  static Tensor Full(std::vector<int64_t> shape, double value);
  static Tensor FromVector(std::vector<int64_t> shape, std::vector<double> data);
  static Tensor Scalar(double value);

  bool Defined() const { return impl_ != nullptr; }
  const std::vector<int64_t> &Shape() const { return impl_->shape; }
  int64_t NumElements() const { return static_cast<int64_t>(impl_->data.size()); }
  int64_t Dim(int axis) const { return impl_->shape[static_cast<size_t>(axis)]; }
  int Rank() const { return static_cast<int>(impl_->shape.size()); }
  bool IsScalar() const { return impl_->shape.empty(); }

  const double *Data() const { return impl_->data.data(); }
  double *MutableData() { return impl_->data.data(); }
  double At(int64_t i) const { return impl_->data[static_cast<size_t>(i)]; }
  double At2(int64_t i, int64_t j) const {
    return impl_->data[static_cast<size_t>(i * impl_->shape[1] + j)];
  }
  // Scalar value; rejects non-scalars.
  double Value() const;

  void SetRequiresGrad(bool requires_grad);
  bool RequiresGrad() const { return impl_->requires_grad; }
  bool Tracked() const { return impl_->tracked; }

  bool HasGrad() const { return !impl_->grad.empty(); }
  const double *Grad() const;     // rejects if never populated
  double GradAt(int64_t i) const;
  void ZeroGrad();

  void FillGaussian(Rng *rng, double stddev);
  void FillUniform(Rng *rng, double lo, double hi);

  // Deep copy of the values, detached from any graph.
  Tensor Clone() const;

  std::shared_ptr<TensorImpl> Impl() const { return impl_; }

 private:
  std::shared_ptr<TensorImpl> impl_;
};

// Reverse-mode sweep from a scalar loss. Accumulates d(loss)/d(param) into
// every reachable parameter's grad. Rejects non-scalar losses.
void Backward(const Tensor &loss);

int64_t NumElementsOfShape(const std::vector<int64_t> &shape);

// Allocates (zero-filled) on first use.
double *GradBuf(TensorImpl *t);

}  // namespace kwsd

#endif  // KWSD_TENSOR_TENSOR_H_
