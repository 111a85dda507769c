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

#ifndef CASSNAT_UTIL_IO_H_
#define CASSNAT_UTIL_IO_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cassnat {

// Little-endian binary primitives shared by the checkpoint and corpus file
// formats. Encoding is explicit byte-by-byte so files are portable.
void WriteU32(std::ostream& os, uint32_t v);
void WriteU64(std::ostream& os, uint64_t v);
void WriteF32(std::ostream& os, float v);
void WriteF64(std::ostream& os, double v);
void WriteString(std::ostream& os, const std::string& s);  // u32 length prefix

uint32_t ReadU32(std::istream& is);
uint64_t ReadU64(std::istream& is);
float ReadF32(std::istream& is);
double ReadF64(std::istream& is);
std::string ReadString(std::istream& is);

void WriteF32Array(std::ostream& os, const std::vector<float>& v);
void WriteF64Array(std::ostream& os, const std::vector<double>& v);
std::vector<float> ReadF32Array(std::istream& is, size_t count);
std::vector<double> ReadF64Array(std::istream& is, size_t count);

}  // namespace cassnat

#endif  // CASSNAT_UTIL_IO_H_
