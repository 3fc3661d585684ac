// base/rng.h

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

#ifndef KWSD_BASE_RNG_H_
#define KWSD_BASE_RNG_H_

#include <cstdint>
#include <string>

namespace kwsd {

// All randomness in the project goes through this generator so that runs are
// reproducible bit-for-bit from a u64 seed, independent of the standard
// library's unspecified distribution internals.

inline uint64_t SplitMix64(uint64_t &state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256**, seeded through SplitMix64.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t sm = seed;
    for (int i = 0; i < 4; i++) s_[i] = SplitMix64(sm);
  }

  uint64_t NextU64() {
    const uint64_t result = Rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = Rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double NextUnit() {
    return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
  }

  // Uniform in (0, 1]; never zero, safe under log().
  double NextUnitOpen() {
    return (static_cast<double>(NextU64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), rejection sampled so it is exactly uniform.
  uint64_t NextBelow(uint64_t n);

  double NextRange(double lo, double hi) { return lo + (hi - lo) * NextUnit(); }

  // Standard normal via Box-Muller; second value of the pair is cached.
  double NextGaussian();

 private:
  static uint64_t Rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t s_[4];
  bool have_cached_ = false;
  double cached_ = 0.0;
};

// Stable seed derivation for independent sub-streams: FNV-1a over the base
// seed, a tag string, and an index. Train/valid/test streams get disjoint
// tags so they can never collide.
uint64_t DeriveSeed(uint64_t base, const std::string &tag, uint64_t index);

}  // namespace kwsd

#endif  // KWSD_BASE_RNG_H_
