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

#include "cassnat/models/losses.h"

#include "cassnat/numcore/ops.h"
#include "cassnat/util/common.h"

namespace cassnat {

Tensor SmoothedCrossEntropy(const Tensor& logits,
                            const std::vector<int>& targets, double eps) {
  CheckContract(logits.rank() == 2, "cross entropy: logits must be 2-D");
  const int n = logits.rows();
  const int v = logits.cols();
  CheckContract(static_cast<int>(targets.size()) == n,
                "cross entropy: one target per logits row");
  CheckContract(eps >= 0.0 && eps < 1.0,
                "cross entropy: smoothing must lie in [0, 1)");

  std::vector<double> q(static_cast<size_t>(n) * v, eps / v);
  for (int i = 0; i < n; ++i) {
    CheckContract(targets[i] >= 0 && targets[i] < v,
                  "cross entropy: target id outside vocabulary");
    q[static_cast<size_t>(i) * v + targets[i]] += 1.0 - eps;
  }
  const Tensor q_t = Tensor::FromData({n, v}, std::move(q));
  const Tensor logp = ops::LogSoftmax(logits);
  return ops::Scale(ops::ReduceSum(ops::Mul(logp, q_t)), -1.0 / n);
}

}  // namespace cassnat
