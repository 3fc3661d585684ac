// tensor/gradcheck.cc

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

#include "tensor/gradcheck.h"

#include <cmath>

namespace kwsd {

double GradCheckMulti(
    const std::function<Tensor(const std::vector<Tensor> &)> &f,
    const std::vector<Tensor> &inputs, double h) {
  // Analytic pass on tracked copies.
  std::vector<Tensor> tracked;
  tracked.reserve(inputs.size());
  for (const Tensor &x : inputs) {
    Tensor t = x.Clone();
    t.SetRequiresGrad(true);
    tracked.push_back(t);
  }
  Tensor y = f(tracked);
  if (!y.IsScalar())
    throw ValidationError("grad_check: function must return a scalar");
  if (!std::isfinite(y.Value()))
    throw ValidationError("grad_check: non-finite function value");
  Backward(y);

  // Numeric pass on detached copies.
  std::vector<Tensor> probe;
  probe.reserve(inputs.size());
  for (const Tensor &x : inputs) probe.push_back(x.Clone());

  double max_err = 0.0;
  for (size_t which = 0; which < probe.size(); which++) {
    const int64_t n = probe[which].NumElements();
    for (int64_t i = 0; i < n; i++) {
      double *slot = probe[which].MutableData() + i;
      const double orig = *slot;
      *slot = orig + h;
      const double fp = f(probe).Value();
      *slot = orig - h;
      const double fm = f(probe).Value();
      *slot = orig;
      if (!std::isfinite(fp) || !std::isfinite(fm))
        throw ValidationError("grad_check: non-finite value during probing");
      const double numeric = (fp - fm) / (2.0 * h);
      const double analytic =
          tracked[which].HasGrad() ? tracked[which].GradAt(i) : 0.0;
      const double denom =
          std::max(1.0, std::max(std::fabs(analytic), std::fabs(numeric)));
      max_err = std::max(max_err, std::fabs(analytic - numeric) / denom);
    }
  }
  return max_err;
}

double GradCheck(const std::function<Tensor(const Tensor &)> &f,
                 const Tensor &x, double h) {
  return GradCheckMulti(
      [&f](const std::vector<Tensor> &in) { return f(in[0]); }, {x}, h);
}

}  // namespace kwsd
