// tensor/tensor.cc

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

#include "tensor/tensor.h"

#include <algorithm>
#include <unordered_set>

namespace kwsd {

int64_t NumElementsOfShape(const std::vector<int64_t> &shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d < 0) throw ValidationError("negative extent in shape " + ShapeToString(shape));
    n *= d;
  }
  return n;
}

Tensor Tensor::Zeros(std::vector<int64_t> shape) {
  auto impl = std::make_shared<TensorImpl>();
  const int64_t n = NumElementsOfShape(shape);
  impl->shape = std::move(shape);
  impl->data.assign(static_cast<size_t>(n), 0.0);
  return Tensor(std::move(impl));
}

Tensor Tensor::Full(std::vector<int64_t> shape, double value) {
  Tensor t = Zeros(std::move(shape));
  std::fill(t.impl_->data.begin(), t.impl_->data.end(), value);
  return t;
}

Tensor Tensor::FromVector(std::vector<int64_t> shape, std::vector<double> data) {
  const int64_t n = NumElementsOfShape(shape);
  if (n != static_cast<int64_t>(data.size()))
    throw ValidationError("data length " + std::to_string(data.size()) +
                          " does not match shape " + ShapeToString(shape));
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(data);
  return Tensor(std::move(impl));
}

Tensor Tensor::Scalar(double value) { return FromVector({}, {value}); }

double Tensor::Value() const {
  if (!IsScalar())
    throw ValidationError("expected scalar, got shape " + ShapeToString(impl_->shape));
  return impl_->data[0];
}

void Tensor::SetRequiresGrad(bool requires_grad) {
  if (impl_->node)
    throw ValidationError("requires_grad can only be set on leaf tensors");
  impl_->requires_grad = requires_grad;
  impl_->tracked = requires_grad;
}

const double *Tensor::Grad() const {
  if (impl_->grad.empty())
    throw ValidationError("gradient not populated; call Backward first");
  return impl_->grad.data();
}

double Tensor::GradAt(int64_t i) const { return Grad()[i]; }

void Tensor::ZeroGrad() {
  std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

void Tensor::FillGaussian(Rng *rng, double stddev) {
  for (double &v : impl_->data) v = rng->NextGaussian() * stddev;
}

void Tensor::FillUniform(Rng *rng, double lo, double hi) {
  for (double &v : impl_->data) v = rng->NextRange(lo, hi);
}

Tensor Tensor::Clone() const {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = impl_->shape;
  impl->data = impl_->data;
  return Tensor(std::move(impl));
}

double *GradBuf(TensorImpl *t) {
  if (t->grad.empty()) t->grad.assign(t->data.size(), 0.0);
  return t->grad.data();
}

void Backward(const Tensor &loss) {
  if (!loss.IsScalar())
    throw ValidationError("Backward requires a scalar loss, got shape " +
                          ShapeToString(loss.Shape()));
  TensorImpl *root = loss.Impl().get();
  if (!root->tracked) return;  // nothing reachable

  // Iterative post-order DFS; the graph is a DAG by construction.
  std::vector<TensorImpl *> order;
  std::unordered_set<TensorImpl *> visited;
  struct Frame {
    TensorImpl *t;
    size_t next_input;
  };
  std::vector<Frame> stack;
  stack.push_back({root, 0});
  visited.insert(root);
  while (!stack.empty()) {
    Frame &f = stack.back();
    if (f.t->node && f.next_input < f.t->node->inputs.size()) {
      TensorImpl *in = f.t->node->inputs[f.next_input++].get();
      if (in->tracked && visited.insert(in).second) stack.push_back({in, 0});
    } else {
      order.push_back(f.t);
      stack.pop_back();
    }
  }

  // Interior gradients are scratch per sweep; leaves keep accumulating.
  for (TensorImpl *t : order) {
    if (t->node) {
      GradBuf(t);
      std::fill(t->grad.begin(), t->grad.end(), 0.0);
    }
  }
  GradBuf(root)[0] += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorImpl *t = *it;
    if (t->node && t->node->backward) t->node->backward(*t);
  }
}

}  // namespace kwsd
