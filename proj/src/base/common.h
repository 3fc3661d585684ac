// base/common.h

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

#ifndef KWSD_BASE_COMMON_H_
#define KWSD_BASE_COMMON_H_

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace kwsd {

// Bad inputs: configs, shapes, file formats. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string &msg) : std::runtime_error(msg) {}
};

// Failures during a run: non-finite loss, checksum mismatch, I/O loss.
// Maps to CLI exit code 2.
class ComputeError : public std::runtime_error {
 public:
  explicit ComputeError(const std::string &msg) : std::runtime_error(msg) {}
};

inline std::string ShapeToString(const std::vector<int64_t> &shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); i++) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

}  // namespace kwsd

#endif  // KWSD_BASE_COMMON_H_
