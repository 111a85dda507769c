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

#ifndef CASSNAT_NNET_PARAM_STORE_H_
#define CASSNAT_NNET_PARAM_STORE_H_

#include <map>
#include <string>
#include <vector>

#include "cassnat/numcore/checkpoint.h"
#include "cassnat/numcore/tensor.h"

namespace cassnat {

// Owns every trainable tensor of a model, keyed by a stable dotted name.
// Initialization derives each tensor's RNG stream from the store seed and a
// platform-independent hash of the name, so init never depends on creation
// order. Registering a name twice is a contract error.
class ParamStore {
 public:
  explicit ParamStore(uint64_t seed) : seed_(seed) {}

  // Xavier-uniform matrix (fans = rows/cols).
  Tensor Matrix(const std::string& name, int rows, int cols);
  // Zero-filled vector (biases).
  Tensor Bias(const std::string& name, int n);
  // One-filled vector (layer-norm gains).
  Tensor Ones(const std::string& name, int n);
  // Xavier-uniform with explicit fans (convolution kernels).
  Tensor Kernel(const std::string& name, const Shape& shape, int fan_in,
                int fan_out);
  // Zero-initialized table (relative-position biases).
  Tensor ZeroTable(const std::string& name, int rows, int cols);

  Tensor Get(const std::string& name) const;
  bool Has(const std::string& name) const;
  const std::map<std::string, Tensor>& params() const { return params_; }
  std::vector<Tensor> AllTensors() const;
  int64_t NumParameters() const;
  void ZeroGrads();

  std::vector<CheckpointEntry> ToEntries(uint32_t dtype = kDtypeF64) const;
  // Restores values; entry names and shapes must match this store exactly.
  void FromEntries(const std::vector<CheckpointEntry>& entries);

 private:
  Tensor Register(const std::string& name, Tensor t);

  std::map<std::string, Tensor> params_;
  uint64_t seed_ = 0;
};

}  // namespace cassnat

#endif  // CASSNAT_NNET_PARAM_STORE_H_
