// tensor/checkpoint.cc

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

#include "tensor/checkpoint.h"

#include "base/binio.h"
#include "base/common.h"
#include "base/hash.h"

namespace kwsd {

static const char kMagic[8] = {'D', 'V', 'C', 'C', 'C', 'K', 'P', 'T'};
static const uint8_t kVersion = 1;

void SaveCheckpoint(const std::string &path, const NamedTensors &tensors) {
  ByteWriter w;
  w.PutBytes(kMagic, 8);
  w.PutU8(kVersion);
  for (const auto &[name, t] : tensors) {
    w.PutU32(static_cast<uint32_t>(name.size()));
    w.PutBytes(name.data(), name.size());
    w.PutU32(static_cast<uint32_t>(t.Shape().size()));
    for (int64_t d : t.Shape()) w.PutU32(static_cast<uint32_t>(d));
    for (int64_t i = 0; i < t.NumElements(); i++) w.PutF64(t.At(i));
  }
  AtomicWriteFile(path, w.Bytes());
}

NamedTensors LoadCheckpoint(const std::string &path) {
  const std::vector<char> bytes = ReadFileBytes(path);
  ByteReader r(bytes);
  char magic[8];
  r.GetBytes(magic, 8);
  for (int i = 0; i < 8; i++)
    if (magic[i] != kMagic[i])
      throw ValidationError("not a checkpoint file (bad magic): " + path);
  const uint8_t version = r.GetU8();
  if (version != kVersion)
    throw ValidationError("unsupported checkpoint version " +
                          std::to_string(version) + " in " + path);
  NamedTensors out;
  while (!r.AtEnd()) {
    const uint32_t name_len = r.GetU32();
    std::string name(name_len, '\0');
    r.GetBytes(name.data(), name_len);
    const uint32_t rank = r.GetU32();
    std::vector<int64_t> shape(rank);
    for (uint32_t i = 0; i < rank; i++) shape[i] = r.GetU32();
    const int64_t n = NumElementsOfShape(shape);
    std::vector<double> data(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; i++) data[static_cast<size_t>(i)] = r.GetF64();
    out.emplace_back(std::move(name),
                     Tensor::FromVector(std::move(shape), std::move(data)));
  }
  return out;
}

uint64_t TensorsChecksum(const NamedTensors &tensors) {
  Fnv1a64 h;
  for (const auto &[name, t] : tensors) {
    h.AddBytes(name.data(), name.size());
    for (int64_t d : t.Shape()) h.AddU64(static_cast<uint64_t>(d));
    h.AddBytes(t.Data(), sizeof(double) * static_cast<size_t>(t.NumElements()));
  }
  return h.Digest();
}

const Tensor &FindTensor(const NamedTensors &tensors, const std::string &name) {
  for (const auto &[n, t] : tensors)
    if (n == name) return t;
  throw ValidationError("tensor '" + name + "' not found in container");
}

bool HasTensor(const NamedTensors &tensors, const std::string &name) {
  for (const auto &[n, t] : tensors)
    if (n == name) return true;
  return false;
}

}  // namespace kwsd
