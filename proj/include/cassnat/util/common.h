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

#ifndef CASSNAT_UTIL_COMMON_H_
#define CASSNAT_UTIL_COMMON_H_

#include <stdexcept>
#include <string>

namespace cassnat {

// Tensor shapes (or other dimensions) do not line up.
class DimensionError : public std::runtime_error {
 public:
  explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

// An operation was called outside its contract.
class ContractError : public std::runtime_error {
 public:
  explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

// A required input file or resource is missing.
class MissingInputError : public std::runtime_error {
 public:
  explicit MissingInputError(const std::string& msg)
      : std::runtime_error(msg) {}
};

// A config file failed validation.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training aborted (non-finite loss).
class TrainAbortError : public std::runtime_error {
 public:
  explicit TrainAbortError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void CheckContract(bool cond, const std::string& msg) {
  if (!cond) throw ContractError(msg);
}

}  // namespace cassnat

#endif  // CASSNAT_UTIL_COMMON_H_
