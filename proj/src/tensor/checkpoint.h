// tensor/checkpoint.h

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

#ifndef KWSD_TENSOR_CHECKPOINT_H_
#define KWSD_TENSOR_CHECKPOINT_H_

#include <cstdint>
#include <string>

#include "tensor/adam.h"

namespace kwsd {

// Flat named-tensor container. Layout, all little-endian:
//   magic "DVCCCKPT", version byte (1), then per entry:
//   name length (u32), UTF-8 name, rank (u32), extents (u32 each),
//   payload (f64). Entries run to end of file; write order is preserved, so
//   identical contents give identical bytes.
void SaveCheckpoint(const std::string &path, const NamedTensors &tensors);
NamedTensors LoadCheckpoint(const std::string &path);

// FNV-1a over names, shapes, and raw f64 payloads, in order.
uint64_t TensorsChecksum(const NamedTensors &tensors);

// Lookup by exact name; throws ValidationError when absent.
const Tensor &FindTensor(const NamedTensors &tensors, const std::string &name);
bool HasTensor(const NamedTensors &tensors, const std::string &name);

}  // namespace kwsd

#endif  // KWSD_TENSOR_CHECKPOINT_H_
