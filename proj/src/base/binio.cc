// base/binio.cc

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

#include "base/binio.h"

#include <cstdio>
#include <fstream>

#include "base/common.h"

namespace kwsd {

uint8_t ByteReader::GetU8() {
  if (pos_ + 1 > size_) throw ValidationError("truncated input (u8)");
  return static_cast<uint8_t>(data_[pos_++]);
}

uint32_t ByteReader::GetU32() {
  if (pos_ + 4 > size_) throw ValidationError("truncated input (u32)");
  uint32_t v = 0;
  for (int i = 0; i < 4; i++)
    v |= static_cast<uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
  pos_ += 4;
  return v;
}

uint64_t ByteReader::GetU64() {
  if (pos_ + 8 > size_) throw ValidationError("truncated input (u64)");
  uint64_t v = 0;
  for (int i = 0; i < 8; i++)
    v |= static_cast<uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
  pos_ += 8;
  return v;
}

float ByteReader::GetF32() {
  uint32_t bits = GetU32();
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

double ByteReader::GetF64() {
  uint64_t bits = GetU64();
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void ByteReader::GetBytes(void *out, size_t n) {
  if (pos_ + n > size_) throw ValidationError("truncated input (bytes)");
  std::memcpy(out, data_ + pos_, n);
  pos_ += n;
}

std::vector<char> ReadFileBytes(const std::string &path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw ValidationError("cannot open file: " + path);
  const std::streamsize size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<char> bytes(static_cast<size_t>(size));
  if (size > 0 && !in.read(bytes.data(), size))
    throw ComputeError("short read on file: " + path);
  return bytes;
}

static void WriteThenRename(const std::string &path, const char *data, size_t n) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ComputeError("cannot open for writing: " + tmp);
    out.write(data, static_cast<std::streamsize>(n));
    if (!out) throw ComputeError("short write on file: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw ComputeError("cannot rename " + tmp + " to " + path);
}

void AtomicWriteFile(const std::string &path, const std::vector<char> &bytes) {
  WriteThenRename(path, bytes.data(), bytes.size());
}

void AtomicWriteFile(const std::string &path, const std::string &text) {
  WriteThenRename(path, text.data(), text.size());
}

}  // namespace kwsd
