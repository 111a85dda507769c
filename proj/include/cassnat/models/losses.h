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

#ifndef CASSNAT_MODELS_LOSSES_H_
#define CASSNAT_MODELS_LOSSES_H_

#include <vector>

#include "cassnat/numcore/tensor.h"

namespace cassnat {

// Label-smoothed cross entropy, averaged over rows: with smoothed targets
// q = (1 - eps) * onehot + eps / V, returns -mean_i sum_v q[i,v] log p[i,v]
// where p is the row softmax of `logits`. One target id per logits row.
// A uniform output head yields exactly log V for any eps. Differentiable
// with respect to `logits`.
Tensor SmoothedCrossEntropy(const Tensor& logits,
                            const std::vector<int>& targets, double eps);

// One utterance's training loss plus per-term diagnostics. When the target
// cannot fit the subsampled frame count, feasible is false and every other
// field is meaningless; callers skip the utterance and count it.
struct LossOut {
  bool feasible = true;
  Tensor total;            // scalar, graph-connected
  double loss = 0.0;       // total.item()
  double ctc_final = 0.0;  // per-frame normalized
  double ctc_mid = 0.0;
  double ce_final = 0.0;
  double ce_mid = 0.0;
  // len(collapse(best path)) - len(target): the length-prediction error the
  // training log tracks as LPER.
  int length_error = 0;
};

}  // namespace cassnat

#endif  // CASSNAT_MODELS_LOSSES_H_
