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
//
// Brute-force reference implementations used only by tests. They enumerate
// the full V^T path space, so they are only valid at tiny sizes, and they are
// deliberately written without reusing any production recursion.

#ifndef CASSNAT_TESTS_ORACLES_H_
#define CASSNAT_TESTS_ORACLES_H_

#include <cmath>
#include <limits>
#include <vector>

#include "cassnat/ctc/alignment.h"
#include "cassnat/ctc/vocab.h"
#include "cassnat/numcore/tensor.h"

namespace cassnat {
namespace testing {

struct BruteForceCtc {
  double log_sum = -std::numeric_limits<double>::infinity();
  double log_max = -std::numeric_limits<double>::infinity();
  std::vector<int> best_path;
  int num_paths = 0;  // paths collapsing to the target
};

// Enumerates every length-T path over the vocabulary, keeps those whose
// collapse equals `target`, and accumulates their summed and maximum
// probability. Normalizes the grid row-wise itself (plain softmax).
inline BruteForceCtc EnumerateCtcPaths(const Tensor& logits,
                                       const std::vector<int>& target,
                                       const Vocabulary& vocab) {
  const int t_frames = logits.dim(0), v = logits.dim(1);
  std::vector<double> logp(static_cast<size_t>(t_frames) * v);
  for (int t = 0; t < t_frames; ++t) {
    const double* x = logits.data().data() + static_cast<size_t>(t) * v;
    double hi = x[0];
    for (int j = 1; j < v; ++j) hi = std::max(hi, x[j]);
    double z = 0.0;
    for (int j = 0; j < v; ++j) z += std::exp(x[j] - hi);
    for (int j = 0; j < v; ++j) {
      logp[static_cast<size_t>(t) * v + j] = x[j] - hi - std::log(z);
    }
  }

  BruteForceCtc result;
  std::vector<int> path(t_frames, 0);
  while (true) {
    if (Collapse(path, vocab.blank_id) == target) {
      double lp = 0.0;
      for (int t = 0; t < t_frames; ++t) {
        lp += logp[static_cast<size_t>(t) * v + path[t]];
      }
      ++result.num_paths;
      if (lp > result.log_max) {
        result.log_max = lp;
        result.best_path = path;
      }
      double hi = std::max(result.log_sum, lp);
      double lo = std::min(result.log_sum, lp);
      result.log_sum = result.log_sum ==
                               -std::numeric_limits<double>::infinity()
                           ? lp
                           : hi + std::log1p(std::exp(lo - hi));
    }
    // Odometer increment over the V^T space.
    int pos = t_frames - 1;
    while (pos >= 0 && path[pos] == v - 1) path[pos--] = 0;
    if (pos < 0) break;
    ++path[pos];
  }
  return result;
}

// All blank-free token sequences of length <= max_len, for totality checks.
inline std::vector<std::vector<int>> AllTargets(const Vocabulary& vocab,
                                                int max_len) {
  std::vector<std::vector<int>> all = {{}};
  std::vector<std::vector<int>> frontier = {{}};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::vector<int>> next;
    for (const auto& seq : frontier) {
      for (int id = 0; id < vocab.size(); ++id) {
        if (id == vocab.blank_id) continue;
        std::vector<int> ext = seq;
        ext.push_back(id);
        next.push_back(ext);
      }
    }
    all.insert(all.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return all;
}

}  // namespace testing
}  // namespace cassnat

#endif  // CASSNAT_TESTS_ORACLES_H_
