// base/rng.cc

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

#include "base/rng.h"

#include <cmath>

#include "base/hash.h"

namespace kwsd {

uint64_t Rng::NextBelow(uint64_t n) {
  if (n == 0) return 0;
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = NextU64();
  } while (x >= limit);
  return x % n;
}

double Rng::NextGaussian() {
  if (have_cached_) {
    have_cached_ = false;
    return cached_;
  }
  const double u1 = NextUnitOpen();
  const double u2 = NextUnit();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  cached_ = r * std::sin(a);
  have_cached_ = true;
  return r * std::cos(a);
}

uint64_t DeriveSeed(uint64_t base, const std::string &tag, uint64_t index) {
  Fnv1a64 h;
  h.AddU64(base);
  h.AddBytes(tag.data(), tag.size());
  h.AddU64(index);
  return h.Digest();
}

}  // namespace kwsd
