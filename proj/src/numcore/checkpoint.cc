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

#include "cassnat/numcore/checkpoint.h"

#include <fstream>

#include "cassnat/util/io.h"

namespace cassnat {

namespace {
constexpr char kMagic[4] = {'C', 'A', 'S', 'S'};
}  // namespace

void SaveCheckpoint(const std::string& path,
                    const std::vector<CheckpointEntry>& entries) {
  std::ofstream os(path, std::ios::binary);
  CheckContract(os.good(), "checkpoint: cannot open " + path + " for write");
  os.write(kMagic, 4);
  WriteU32(os, kCheckpointVersion);
  WriteU32(os, static_cast<uint32_t>(entries.size()));
  for (const auto& e : entries) {
    CheckContract(e.dtype == kDtypeF64 || e.dtype == kDtypeF32,
                  "checkpoint: unknown dtype code for " + e.name);
    CheckContract(NumElements(e.shape) ==
                      static_cast<int64_t>(e.values.size()),
                  "checkpoint: shape/value mismatch for " + e.name);
    WriteString(os, e.name);
    WriteU32(os, e.dtype);
    WriteU32(os, static_cast<uint32_t>(e.shape.size()));
    for (int d : e.shape) WriteU32(os, static_cast<uint32_t>(d));
    if (e.dtype == kDtypeF64) {
      WriteF64Array(os, e.values);
    } else {
      std::vector<float> narrow(e.values.begin(), e.values.end());
      WriteF32Array(os, narrow);
    }
  }
  CheckContract(os.good(), "checkpoint: write to " + path + " failed");
}

std::vector<CheckpointEntry> LoadCheckpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is.good()) {
    throw MissingInputError("checkpoint: cannot open " + path);
  }
  char magic[4] = {};
  is.read(magic, 4);
  if (!is.good() || magic[0] != 'C' || magic[1] != 'A' || magic[2] != 'S' ||
      magic[3] != 'S') {
    throw ContractError("checkpoint: bad magic in " + path);
  }
  uint32_t version = ReadU32(is);
  if (version != kCheckpointVersion) {
    throw ContractError("checkpoint: unsupported version " +
                        std::to_string(version) + " in " + path);
  }
  uint32_t count = ReadU32(is);
  std::vector<CheckpointEntry> entries;
  entries.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    CheckpointEntry e;
    e.name = ReadString(is);
    e.dtype = ReadU32(is);
    if (e.dtype != kDtypeF64 && e.dtype != kDtypeF32) {
      throw ContractError("checkpoint: unknown dtype code " +
                          std::to_string(e.dtype) + " for " + e.name);
    }
    uint32_t rank = ReadU32(is);
    e.shape.resize(rank);
    for (uint32_t r = 0; r < rank; ++r) {
      e.shape[r] = static_cast<int>(ReadU32(is));
    }
    size_t n = static_cast<size_t>(NumElements(e.shape));
    if (e.dtype == kDtypeF64) {
      e.values = ReadF64Array(is, n);
    } else {
      std::vector<float> narrow = ReadF32Array(is, n);
      e.values.assign(narrow.begin(), narrow.end());
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

void AverageCheckpoints(const std::vector<std::string>& in_paths,
                        const std::string& out_path) {
  CheckContract(!in_paths.empty(), "checkpoint average: no inputs");
  std::vector<CheckpointEntry> mean = LoadCheckpoint(in_paths[0]);
  for (size_t k = 1; k < in_paths.size(); ++k) {
    std::vector<CheckpointEntry> next = LoadCheckpoint(in_paths[k]);
    CheckContract(next.size() == mean.size(),
                  "checkpoint average: entry count differs in " + in_paths[k]);
    for (size_t i = 0; i < mean.size(); ++i) {
      CheckContract(next[i].name == mean[i].name &&
                        next[i].shape == mean[i].shape,
                    "checkpoint average: entry " + mean[i].name +
                        " differs in " + in_paths[k]);
      for (size_t j = 0; j < mean[i].values.size(); ++j) {
        mean[i].values[j] += next[i].values[j];
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(in_paths.size());
  for (auto& e : mean) {
    for (double& v : e.values) v *= inv;
  }
  SaveCheckpoint(out_path, mean);
}

}  // namespace cassnat
