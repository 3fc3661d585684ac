// base/hash.h

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

#ifndef KWSD_BASE_HASH_H_
#define KWSD_BASE_HASH_H_

#include <cstddef>
#include <cstdint>
#include <string>

namespace kwsd {

// FNV-1a, 64 bit. Used for parameter checksums, run-manifest digests, and
// seed derivation. Not cryptographic; collisions are a non-issue at the
// scale of a run directory.
class Fnv1a64 {
 public:
  void AddBytes(const void *data, size_t n) {
    const unsigned char *p = static_cast<const unsigned char *>(data);
    for (size_t i = 0; i < n; i++) {
      state_ ^= static_cast<uint64_t>(p[i]);
      state_ *= 0x100000001b3ULL;
    }
  }
  void AddU64(uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; i++) b[i] = static_cast<unsigned char>(v >> (8 * i));
    AddBytes(b, 8);
  }
  uint64_t Digest() const { return state_; }

 private:
  uint64_t state_ = 0xcbf29ce484222325ULL;
};

uint64_t HashBytes(const void *data, size_t n);
uint64_t HashFile(const std::string &path);  // throws ComputeError if unreadable
std::string HashToHex(uint64_t h);

}  // namespace kwsd

#endif  // KWSD_BASE_HASH_H_
