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

#include "cassnat/numcore/grad_check.h"

#include <cmath>
#include <cstdlib>

namespace cassnat {

GradCheckResult CheckGradients(const std::function<Tensor()>& scalar_fn,
                               const std::vector<Tensor>& params, double h) {
  // Analytic pass first: one graph build, one backward sweep.
  for (const Tensor& p : params) {
    CheckContract(p.defined() && p.requires_grad(),
                  "grad check: parameters must track gradients");
    Tensor(p).ZeroGrad();
  }
  Tensor loss = scalar_fn();
  Backward(loss);

  GradCheckResult result;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Tensor p = params[pi];
    auto& values = p.data();
    const auto& analytic = p.has_grad() ? p.grad() : p.MutableGrad();
    for (size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      double up;
      {
        NoGradGuard ng;
        up = scalar_fn().item();
      }
      values[i] = saved - h;
      double down;
      {
        NoGradGuard ng;
        down = scalar_fn().item();
      }
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double rel = std::abs(analytic[i] - numeric) /
                         std::max(1.0, std::abs(numeric));
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = static_cast<int>(pi);
        result.worst_coord = static_cast<int64_t>(i);
      }
    }
  }
  return result;
}

}  // namespace cassnat
