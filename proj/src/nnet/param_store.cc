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

#include "cassnat/nnet/param_store.h"

#include <cmath>

#include "cassnat/util/common.h"
#include "cassnat/util/rng.h"

namespace cassnat {

namespace {

// FNV-1a, fixed 64-bit variant; std::hash is not stable across platforms.
uint64_t HashName(const std::string& name) {
  uint64_t h = 1469598103934665603ULL;
  for (char c : name) {
    h ^= static_cast<uint64_t>(static_cast<unsigned char>(c));
    h *= 1099511628211ULL;
  }
  return h;
}

Tensor XavierUniform(const Shape& shape, int fan_in, int fan_out, Rng* rng) {
  Tensor t = Tensor::Zeros(shape, /*requires_grad=*/true);
  const double lim = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& v : t.data()) v = (rng->Uniform() * 2.0 - 1.0) * lim;
  return t;
}

Tensor Filled(const Shape& shape, double value) {
  return Tensor::Full(shape, value, /*requires_grad=*/true);
}

}  // namespace

Tensor ParamStore::Register(const std::string& name, Tensor t) {
  CheckContract(params_.find(name) == params_.end(),
                "ParamStore: duplicate parameter name " + name);
  params_.emplace(name, t);
  return t;
}

Tensor ParamStore::Matrix(const std::string& name, int rows, int cols) {
  Rng rng(Rng::Mix(seed_, HashName(name)));
  return Register(name, XavierUniform(Shape({rows, cols}), rows, cols, &rng));
}

Tensor ParamStore::Bias(const std::string& name, int n) {
  return Register(name, Filled(Shape({n}), 0.0));
}

Tensor ParamStore::Ones(const std::string& name, int n) {
  return Register(name, Filled(Shape({n}), 1.0));
}

Tensor ParamStore::Kernel(const std::string& name, const Shape& shape,
                          int fan_in, int fan_out) {
  Rng rng(Rng::Mix(seed_, HashName(name)));
  return Register(name, XavierUniform(shape, fan_in, fan_out, &rng));
}

Tensor ParamStore::ZeroTable(const std::string& name, int rows, int cols) {
  return Register(name, Filled(Shape({rows, cols}), 0.0));
}

Tensor ParamStore::Get(const std::string& name) const {
  auto it = params_.find(name);
  CheckContract(it != params_.end(), "ParamStore: unknown parameter " + name);
  return it->second;
}

bool ParamStore::Has(const std::string& name) const {
  return params_.find(name) != params_.end();
}

std::vector<Tensor> ParamStore::AllTensors() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& [name, t] : params_) out.push_back(t);
  return out;
}

int64_t ParamStore::NumParameters() const {
  int64_t n = 0;
  for (const auto& [name, t] : params_) n += t.numel();
  return n;
}

void ParamStore::ZeroGrads() {
  for (auto& [name, t] : params_) t.ZeroGrad();
}

std::vector<CheckpointEntry> ParamStore::ToEntries(uint32_t dtype) const {
  std::vector<CheckpointEntry> entries;
  entries.reserve(params_.size());
  for (const auto& [name, t] : params_) {
    CheckpointEntry e;
    e.name = name;
    e.dtype = dtype;
    e.shape = t.shape();
    e.values = t.data();
    entries.push_back(std::move(e));
  }
  return entries;
}

void ParamStore::FromEntries(const std::vector<CheckpointEntry>& entries) {
  CheckContract(entries.size() == params_.size(),
                "ParamStore: checkpoint has " + std::to_string(entries.size()) +
                    " entries, model has " + std::to_string(params_.size()));
  for (const CheckpointEntry& e : entries) {
    auto it = params_.find(e.name);
    CheckContract(it != params_.end(),
                  "ParamStore: checkpoint entry " + e.name +
                      " does not exist in the model");
    Tensor& t = it->second;
    CheckContract(static_cast<int64_t>(e.values.size()) == t.numel(),
                  "ParamStore: size mismatch for " + e.name);
    CheckContract(e.shape == t.shape(),
                  "ParamStore: shape mismatch for " + e.name);
    t.data() = e.values;
  }
}

}  // namespace cassnat
