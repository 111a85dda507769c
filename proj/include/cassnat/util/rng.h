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

#ifndef CASSNAT_UTIL_RNG_H_
#define CASSNAT_UTIL_RNG_H_

#include <cstdint>
#include <random>

namespace cassnat {

// Deterministic random source. Every place that needs randomness takes an
// explicit seed (or an Rng), and independent streams are derived with Mix so
// that results do not depend on evaluation order or thread count.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  // Derives an independent stream id from a base seed and a salt.
  static uint64_t Mix(uint64_t seed, uint64_t salt);

  uint64_t Next() { return gen_(); }

  // Uniform double in [0, 1).
  double Uniform();

  // Standard normal via Box-Muller, so draws do not depend on the C++
  // library's distribution implementation.
  double Normal();

  // Uniform integer in [lo, hi], bounds inclusive.
  int UniformInt(int lo, int hi);

  bool Bernoulli(double p) { return Uniform() < p; }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cassnat

#endif  // CASSNAT_UTIL_RNG_H_
