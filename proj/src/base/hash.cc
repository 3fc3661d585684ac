// base/hash.cc

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

#include "base/hash.h"

#include <cstdio>
#include <fstream>
#include <vector>

#include "base/common.h"

namespace kwsd {

uint64_t HashBytes(const void *data, size_t n) {
  Fnv1a64 h;
  h.AddBytes(data, n);
  return h.Digest();
}

uint64_t HashFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ComputeError("cannot open file for hashing: " + path);
  Fnv1a64 h;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h.AddBytes(buf.data(), static_cast<size_t>(in.gcount()));
  }
  return h.Digest();
}

std::string HashToHex(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace kwsd
