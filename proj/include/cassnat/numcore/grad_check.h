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

#ifndef CASSNAT_NUMCORE_GRAD_CHECK_H_
#define CASSNAT_NUMCORE_GRAD_CHECK_H_

#include <functional>
#include <vector>

#include "cassnat/numcore/tensor.h"

namespace cassnat {

struct GradCheckResult {
  double max_rel_error = 0.0;  // max_i |analytic - numeric| / max(1, |numeric|)
  int worst_param = -1;        // index into the checked tensor list
  int64_t worst_coord = -1;
};

// Compares the analytic gradient of scalar_fn with central finite
// differences perturbed coordinate-wise on every tensor in `params`.
// scalar_fn must rebuild the graph from the current parameter data on each
// call and return a scalar loss tensor.
GradCheckResult CheckGradients(
    const std::function<Tensor()>& scalar_fn, const std::vector<Tensor>& params,
    double h = 1e-5);

}  // namespace cassnat

#endif  // CASSNAT_NUMCORE_GRAD_CHECK_H_
