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

#ifndef CASSNAT_NUMCORE_CHECKPOINT_H_
#define CASSNAT_NUMCORE_CHECKPOINT_H_

#include <string>
#include <vector>

#include "cassnat/numcore/tensor.h"

namespace cassnat {

// Checkpoint file layout (all integers little-endian):
//   magic "CASS" | version u32 | entry count u32 | entries...
// Each entry: name (u32 length + UTF-8 bytes) | dtype u32 | rank u32 |
// dims u32 each | raw values (f64 or f32, little-endian).
inline constexpr uint32_t kCheckpointVersion = 1;
inline constexpr uint32_t kDtypeF64 = 0;
inline constexpr uint32_t kDtypeF32 = 1;

struct CheckpointEntry {
  std::string name;
  uint32_t dtype = kDtypeF64;
  Shape shape;
  std::vector<double> values;  // widened to double in memory
};

void SaveCheckpoint(const std::string& path,
                    const std::vector<CheckpointEntry>& entries);

// Throws MissingInputError if the file does not exist and ContractError on a
// bad magic, an unknown version, or an unknown dtype code.
std::vector<CheckpointEntry> LoadCheckpoint(const std::string& path);

// Elementwise mean of several checkpoints with identical entry lists. The
// output keeps the first checkpoint's per-entry dtypes.
void AverageCheckpoints(const std::vector<std::string>& in_paths,
                        const std::string& out_path);

}  // namespace cassnat

#endif  // CASSNAT_NUMCORE_CHECKPOINT_H_
