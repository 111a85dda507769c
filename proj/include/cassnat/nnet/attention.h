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

#ifndef CASSNAT_NNET_ATTENTION_H_
#define CASSNAT_NNET_ATTENTION_H_

#include <cstdint>
#include <string>
#include <vector>

#include "cassnat/ctc/alignment.h"
#include "cassnat/nnet/param_store.h"
#include "cassnat/numcore/tensor.h"

namespace cassnat {

// Boolean attention mask over query x key positions; 1 = attendable.
struct AttnMask {
  int n_q = 0;
  int n_k = 0;
  std::vector<uint8_t> allowed;  // n_q x n_k, row-major

  uint8_t at(int i, int j) const {
    return allowed[static_cast<size_t>(i) * n_k + j];
  }

  // No-causal mask: every query sees every (valid) key. num_valid_k < n_k
  // marks the tail keys as padding.
  static AttnMask Full(int n_q, int n_k, int num_valid_k = -1);
  // Causal mask over a single sequence: query i sees keys j <= i, optionally
  // restricted to the first num_valid keys.
  static AttnMask Causal(int n, int num_valid = -1);
  // Token-synchronous mask: query u sees the frames of trigger row u.
  static AttnMask FromTrigger(const TriggerMask& tm);
};

// Multi-head scaled dot-product attention with an additive mask: disallowed
// score entries are driven to -1e9 before the softmax, so every attention
// row still sums to one while masked weights underflow to ~0 (<= 1e-30).
// A query row whose mask allows nothing is a contract error.
//
// With rel_pos_k >= 0 a learned bias b[clip(j - i, -k, k) + k, head] is added
// to the scores (used by encoder and token-decoder self-attention).
class MultiHeadAttention {
 public:
  MultiHeadAttention(ParamStore* store, const std::string& prefix, int d_model,
                     int n_heads, int rel_pos_k = -1);

  // q_in [n_q, d_model], k_in/v_in [n_k, d_model] -> [n_q, d_model].
  Tensor Forward(const Tensor& q_in, const Tensor& k_in, const Tensor& v_in,
                 const AttnMask& mask) const;

  int d_model() const { return d_model_; }

 private:
  int d_model_ = 0;
  int n_heads_ = 0;
  int d_k_ = 0;
  int rel_pos_k_ = -1;
  Tensor wq_, wk_, wv_, wo_;
  Tensor bq_, bk_, bv_, bo_;
  Tensor rel_bias_;  // [2k+1, n_heads] when rel_pos_k_ >= 0
};

// Debug switch: when on, Forward applies the mask as a literal elementwise
// multiply on the softmax of the unmasked scores (rows no longer normalized).
// Exists only so tests can compare the two formulations; off by default.
void SetLiteralMaskMode(bool on);
bool LiteralMaskMode();

}  // namespace cassnat

#endif  // CASSNAT_NNET_ATTENTION_H_
