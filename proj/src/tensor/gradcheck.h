// tensor/gradcheck.h

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

#ifndef KWSD_TENSOR_GRADCHECK_H_
#define KWSD_TENSOR_GRADCHECK_H_

#include <functional>
#include <vector>

#include "tensor/tensor.h"

namespace kwsd {

// Central-difference gradient verification: rebuilds the graph from fresh
// leaf copies, runs Backward once for the analytic gradients, then perturbs
// every input coordinate by +-h. Returns the max over coordinates of
// |analytic - numeric| / max(1, |analytic|, |numeric|). Rejects non-finite
// function values.
double GradCheckMulti(
    const std::function<Tensor(const std::vector<Tensor> &)> &f,
    const std::vector<Tensor> &inputs, double h = 1e-5);

double GradCheck(const std::function<Tensor(const Tensor &)> &f,
                 const Tensor &x, double h = 1e-5);

}  // namespace kwsd

#endif  // KWSD_TENSOR_GRADCHECK_H_
