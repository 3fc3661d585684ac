// tensor/adam.cc

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

#include "tensor/adam.h"

#include <cmath>

#include "tensor/kernels.h"

namespace kwsd {

AdamState::AdamState(const NamedTensors &params, const AdamOptions &opts)
    : params_(params), opts_(opts) {
  m_.resize(params_.size());
  v_.resize(params_.size());
  for (size_t i = 0; i < params_.size(); i++) {
    const size_t n = static_cast<size_t>(params_[i].second.NumElements());
    m_[i].assign(n, 0.0);
    v_[i].assign(n, 0.0);
  }
}

void AdamState::Step() {
  for (auto &[name, t] : params_)
    if (!t.HasGrad())
      throw ValidationError("adam: parameter '" + name + "' has no gradient");
  step_++;
  const double b1 = opts_.beta1, b2 = opts_.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (size_t p = 0; p < params_.size(); p++) {
    Tensor &t = params_[p].second;
    double *x = t.MutableData();
    const double *g = t.Grad();
    double *m = m_[p].data();
    double *v = v_[p].data();
    const int64_t n = t.NumElements();
    ParallelFor(n, [&](int64_t i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double mhat = m[i] / corr1;
      const double vhat = v[i] / corr2;
      x[i] -= opts_.lr * mhat / (std::sqrt(vhat) + opts_.epsilon);
    });
  }
}

void AdamState::ZeroGrads() {
  for (auto &[name, t] : params_) t.ZeroGrad();
}

NamedTensors AdamState::StateTensors() {
  NamedTensors out;
  for (size_t p = 0; p < params_.size(); p++) {
    const auto &shape = params_[p].second.Shape();
    out.emplace_back("adam.m." + params_[p].first, Tensor::FromVector(shape, m_[p]));
    out.emplace_back("adam.v." + params_[p].first, Tensor::FromVector(shape, v_[p]));
  }
  out.emplace_back("adam.step", Tensor::Scalar(static_cast<double>(step_)));
  return out;
}

void AdamState::LoadStateTensors(const NamedTensors &state) {
  auto find = [&](const std::string &name) -> const Tensor & {
    for (const auto &[n, t] : state)
      if (n == name) return t;
    throw ValidationError("adam: missing state tensor '" + name + "'");
  };
  for (size_t p = 0; p < params_.size(); p++) {
    const Tensor &m = find("adam.m." + params_[p].first);
    const Tensor &v = find("adam.v." + params_[p].first);
    if (m.NumElements() != params_[p].second.NumElements())
      throw ValidationError("adam: state shape mismatch for '" + params_[p].first + "'");
    m_[p].assign(m.Data(), m.Data() + m.NumElements());
    v_[p].assign(v.Data(), v.Data() + v.NumElements());
  }
  step_ = static_cast<int64_t>(find("adam.step").Value());
}

}  // namespace kwsd
