// Copyright (c) 2026 cassnat authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cassnat/util/io.h"

#include <cstring>
#include <istream>
#include <ostream>

#include "cassnat/util/common.h"

namespace cassnat {

namespace {

void WriteBytesLE(std::ostream& os, uint64_t v, int n) {
  char buf[8];
  for (int i = 0; i < n; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf, n);
}

uint64_t ReadBytesLE(std::istream& is, int n) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), n);
  if (!is) throw ContractError("binary read: unexpected end of stream");
  uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<uint64_t>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void WriteU32(std::ostream& os, uint32_t v) { WriteBytesLE(os, v, 4); }
void WriteU64(std::ostream& os, uint64_t v) { WriteBytesLE(os, v, 8); }

void WriteF32(std::ostream& os, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  WriteBytesLE(os, bits, 4);
}

void WriteF64(std::ostream& os, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  WriteBytesLE(os, bits, 8);
}

void WriteString(std::ostream& os, const std::string& s) {
  WriteU32(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

uint32_t ReadU32(std::istream& is) {
  return static_cast<uint32_t>(ReadBytesLE(is, 4));
}

uint64_t ReadU64(std::istream& is) { return ReadBytesLE(is, 8); }

float ReadF32(std::istream& is) {
  uint32_t bits = ReadU32(is);
  float v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

double ReadF64(std::istream& is) {
  uint64_t bits = ReadU64(is);
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

std::string ReadString(std::istream& is) {
  uint32_t len = ReadU32(is);
  std::string s(len, '\0');
  if (len > 0) {
    is.read(s.data(), len);
    if (!is) throw ContractError("binary read: unexpected end of stream");
  }
  return s;
}

void WriteF32Array(std::ostream& os, const std::vector<float>& v) {
  for (float x : v) WriteF32(os, x);
}

void WriteF64Array(std::ostream& os, const std::vector<double>& v) {
  for (double x : v) WriteF64(os, x);
}

std::vector<float> ReadF32Array(std::istream& is, size_t count) {
  std::vector<float> v(count);
  for (size_t i = 0; i < count; ++i) v[i] = ReadF32(is);
  return v;
}

std::vector<double> ReadF64Array(std::istream& is, size_t count) {
  std::vector<double> v(count);
  for (size_t i = 0; i < count; ++i) v[i] = ReadF64(is);
  return v;
}

}  // namespace cassnat
