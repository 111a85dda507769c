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

#ifndef CASSNAT_CTC_CTC_H_
#define CASSNAT_CTC_CTC_H_

#include <optional>
#include <vector>

#include "cassnat/ctc/alignment.h"
#include "cassnat/ctc/vocab.h"
#include "cassnat/numcore/ops.h"
#include "cassnat/numcore/tensor.h"
#include "cassnat/util/rng.h"

namespace cassnat {

// Log-domain zero used inside the differentiable recursion. Large enough to
// underflow to an exact 0 under exp() against any live path, small enough
// never to overflow when summed over the grid.
inline constexpr double kLogZero = -1e30;

// A target fits in T frames iff T >= U plus the number of adjacent equal
// pairs (each forces a separating blank).
bool CtcFeasible(int num_frames, const std::vector<int>& target);

// log P(target | logits) summed over every alignment that collapses to the
// target, via the forward recursion over the 2U+1 expanded states in log
// space. Differentiable with respect to `logits` (raw scores; rows are
// normalized internally). Infeasible lengths yield nullopt, never NaN. A
// blank inside the target is a contract error.
std::optional<Tensor> CtcLogProb(const Tensor& logits,
                                 const std::vector<int>& target,
                                 const Vocabulary& vocab);

// Most probable single alignment of `target` (max-product recursion plus
// backtrace). Score ties prefer staying in the same expanded state, then the
// s-1 predecessor, then the s-2 skip. collapse(result.ids) == target always.
std::optional<Alignment> ViterbiAlign(const Tensor& logits,
                                      const std::vector<int>& target,
                                      const Vocabulary& vocab);

// Per-frame argmax path; ties go to the lowest token index. No collapse is
// applied to the result.
Alignment BestPathAlign(const Tensor& logits);

// CTC prefix beam search (path probabilities summed per collapsed prefix,
// per-frame candidates pruned to the top `beam_width` tokens) picks the best
// collapsed sequence, which is then force-aligned with ViterbiAlign. Width 1
// degenerates to the forced alignment of collapse(BestPathAlign).
Alignment BeamSearchAlign(const Tensor& logits, int beam_width,
                          const Vocabulary& vocab);

struct EsaConfig {
  double tau = 0.9;     // sample wherever top-1 probability <= tau
  int num_samples = 50;
  uint64_t seed = 0;
};

// Error-based sampling: per frame keep the argmax when its probability
// exceeds tau, otherwise draw uniformly between the top-1 and top-2 tokens.
// Returns num_samples independent draws, deterministic under the seed.
std::vector<Alignment> EsaSample(const Tensor& logits, const EsaConfig& cfg);

// Analytic gradient of -log P(target | logits) with respect to the raw
// logits, from forward-backward posteriors: softmax(logits) minus the state
// posterior. Written independently of the autodiff graph so the two can
// cross-check each other.
struct CtcGrad {
  double logprob = 0.0;
  std::vector<double> grad;  // [T * V], row-major
};
std::optional<CtcGrad> CtcGradOracle(const Tensor& logits,
                                     const std::vector<int>& target,
                                     const Vocabulary& vocab);

// Sum over frames of the chosen tokens' log-probabilities under the
// row-normalized grid.
double AlignmentLogProb(const Tensor& logits,
                        const std::vector<int>& alignment_ids);

}  // namespace cassnat

#endif  // CASSNAT_CTC_CTC_H_
