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

#include "cassnat/util/rng.h"

#include <cmath>

#include "cassnat/util/common.h"

namespace cassnat {

uint64_t Rng::Mix(uint64_t seed, uint64_t salt) {
  // splitmix64 finalizer over a simple combine.
  uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

double Rng::Uniform() {
  // 53 random bits -> [0, 1).
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::Normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = Uniform();
  } while (u1 <= 0.0);
  double u2 = Uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

int Rng::UniformInt(int lo, int hi) {
  CheckContract(lo <= hi, "Rng::UniformInt: lo > hi");
  uint64_t span = static_cast<uint64_t>(static_cast<int64_t>(hi) -
                                        static_cast<int64_t>(lo) + 1);
  // Rejection sampling keeps the draw exactly uniform.
  uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  uint64_t x = gen_();
  while (x >= limit) x = gen_();
  return lo + static_cast<int>(x % span);
}

}  // namespace cassnat
