// tensor/adam.h

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

#ifndef KWSD_TENSOR_ADAM_H_
#define KWSD_TENSOR_ADAM_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tensor/tensor.h"

namespace kwsd {

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction over a fixed parameter group. The group is bound
// at construction; the step counter advances by exactly one per Step call.
class AdamState {
 public:
  AdamState(const NamedTensors &params, const AdamOptions &opts);

  // Applies one update from the accumulated gradients; gradients are left
  // untouched. A parameter with no populated gradient is rejected by name.
  void Step();
  void ZeroGrads();

  int64_t StepCount() const { return step_; }
  const AdamOptions &Options() const { return opts_; }

  // Optimizer state as named tensors (moments and step counter), for
  // checkpointing and exact resume.
  NamedTensors StateTensors();
  void LoadStateTensors(const NamedTensors &state);

 private:
  NamedTensors params_;
  std::vector<std::vector<double>> m_, v_;
  int64_t step_ = 0;
  AdamOptions opts_;
};

}  // namespace kwsd

#endif  // KWSD_TENSOR_ADAM_H_
