// base/binio.h

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

#ifndef KWSD_BASE_BINIO_H_
#define KWSD_BASE_BINIO_H_

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace kwsd {

// All on-disk integers and floats are little-endian regardless of host.

class ByteWriter {
 public:
  void PutU8(uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void PutU32(uint32_t v) {
    for (int i = 0; i < 4; i++) buf_.push_back(static_cast<char>(v >> (8 * i)));
  }
  void PutU64(uint64_t v) {
    for (int i = 0; i < 8; i++) buf_.push_back(static_cast<char>(v >> (8 * i)));
  }
  void PutF32(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    PutU32(bits);
  }
  void PutF64(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    PutU64(bits);
  }
  void PutBytes(const void *p, size_t n) {
    const char *c = static_cast<const char *>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  const std::vector<char> &Bytes() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class ByteReader {
 public:
  ByteReader(const char *data, size_t size) : data_(data), size_(size) {}
  explicit ByteReader(const std::vector<char> &v) : data_(v.data()), size_(v.size()) {}

  uint8_t GetU8();
  uint32_t GetU32();
  uint64_t GetU64();
  float GetF32();
  double GetF64();
  void GetBytes(void *out, size_t n);
  size_t Remaining() const { return size_ - pos_; }
  bool AtEnd() const { return pos_ == size_; }

 private:
  const char *data_;
  size_t size_;
  size_t pos_ = 0;
};

std::vector<char> ReadFileBytes(const std::string &path);

// Writes to path.tmp then renames, so partially written artifacts never
// appear under their final name.
void AtomicWriteFile(const std::string &path, const std::vector<char> &bytes);
void AtomicWriteFile(const std::string &path, const std::string &text);

}  // namespace kwsd

#endif  // KWSD_BASE_BINIO_H_
