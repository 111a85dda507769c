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

#ifndef CASSNAT_UTIL_PARALLEL_H_
#define CASSNAT_UTIL_PARALLEL_H_

#include <functional>

namespace cassnat {

// Runs fn(i) for i in [0, n) across a worker pool. threads <= 0 picks the
// hardware concurrency. fn must be safe to call concurrently for distinct
// indices; callers keep outputs order-stable by writing to slot i.
void ParallelFor(int n, int threads, const std::function<void(int)>& fn);

}  // namespace cassnat

#endif  // CASSNAT_UTIL_PARALLEL_H_
