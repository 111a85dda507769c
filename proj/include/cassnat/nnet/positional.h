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

#ifndef CASSNAT_NNET_POSITIONAL_H_
#define CASSNAT_NNET_POSITIONAL_H_

#include "cassnat/numcore/tensor.h"

namespace cassnat {

// Fixed sinusoidal positional encoding, [num_positions, d_model]:
//   pe[pos, 2i]   = sin(pos / 10000^(2i / d_model))
//   pe[pos, 2i+1] = cos(pos / 10000^(2i / d_model))
// Constant (never gradient-tracked). d_model must be even and positive.
Tensor SinusoidalEncoding(int num_positions, int d_model);

}  // namespace cassnat

#endif  // CASSNAT_NNET_POSITIONAL_H_
