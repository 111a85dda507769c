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

#include "cassnat/nnet/positional.h"

#include <cmath>

#include "cassnat/util/common.h"

namespace cassnat {

Tensor SinusoidalEncoding(int num_positions, int d_model) {
  CheckContract(num_positions > 0, "SinusoidalEncoding: need positions >= 1");
  CheckContract(d_model > 0 && d_model % 2 == 0,
                "SinusoidalEncoding: d_model must be positive and even");
  Tensor pe = Tensor::Zeros(Shape({num_positions, d_model}));
  for (int pos = 0; pos < num_positions; ++pos) {
    for (int i = 0; i < d_model / 2; ++i) {
      const double rate = std::pow(10000.0, 2.0 * i / d_model);
      pe.data()[static_cast<int64_t>(pos) * d_model + 2 * i] =
          std::sin(pos / rate);
      pe.data()[static_cast<int64_t>(pos) * d_model + 2 * i + 1] =
          std::cos(pos / rate);
    }
  }
  return pe;
}

}  // namespace cassnat
