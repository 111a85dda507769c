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

#include "cassnat/nnet/attention.h"

#include <algorithm>
#include <cmath>

#include "cassnat/numcore/ops.h"
#include "cassnat/util/common.h"

namespace cassnat {

namespace {

bool g_literal_mask_mode = false;

constexpr double kMaskBias = -1e9;

}  // namespace

void SetLiteralMaskMode(bool on) { g_literal_mask_mode = on; }
bool LiteralMaskMode() { return g_literal_mask_mode; }

AttnMask AttnMask::Full(int n_q, int n_k, int num_valid_k) {
  CheckContract(n_q > 0 && n_k > 0, "AttnMask: empty mask");
  if (num_valid_k < 0) num_valid_k = n_k;
  CheckContract(num_valid_k >= 1 && num_valid_k <= n_k,
                "AttnMask: num_valid_k out of range");
  AttnMask m;
  m.n_q = n_q;
  m.n_k = n_k;
  m.allowed.assign(static_cast<size_t>(n_q) * n_k, 0);
  for (int i = 0; i < n_q; ++i) {
    for (int j = 0; j < num_valid_k; ++j) {
      m.allowed[static_cast<size_t>(i) * n_k + j] = 1;
    }
  }
  return m;
}

AttnMask AttnMask::Causal(int n, int num_valid) {
  CheckContract(n > 0, "AttnMask: empty mask");
  if (num_valid < 0) num_valid = n;
  CheckContract(num_valid >= 1 && num_valid <= n,
                "AttnMask: num_valid out of range");
  AttnMask m;
  m.n_q = n;
  m.n_k = n;
  m.allowed.assign(static_cast<size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) {
    // Padded queries (i >= num_valid) see the whole valid prefix so no row
    // is ever fully masked; their outputs are discarded by the caller.
    const int hi = std::min(i, num_valid - 1);
    for (int j = 0; j <= hi; ++j) {
      m.allowed[static_cast<size_t>(i) * n + j] = 1;
    }
  }
  return m;
}

AttnMask AttnMask::FromTrigger(const TriggerMask& tm) {
  CheckContract(tm.num_frames > 0 && tm.num_rows() > 0,
                "AttnMask: empty trigger mask");
  AttnMask m;
  m.n_q = tm.num_rows();
  m.n_k = tm.num_frames;
  m.allowed = tm.rows;
  return m;
}

MultiHeadAttention::MultiHeadAttention(ParamStore* store,
                                       const std::string& prefix, int d_model,
                                       int n_heads, int rel_pos_k)
    : d_model_(d_model),
      n_heads_(n_heads),
      d_k_(d_model / n_heads),
      rel_pos_k_(rel_pos_k) {
  CheckContract(n_heads > 0 && d_model % n_heads == 0,
                "MultiHeadAttention: d_model must divide evenly into heads");
  wq_ = store->Matrix(prefix + ".wq", d_model, d_model);
  wk_ = store->Matrix(prefix + ".wk", d_model, d_model);
  wv_ = store->Matrix(prefix + ".wv", d_model, d_model);
  wo_ = store->Matrix(prefix + ".wo", d_model, d_model);
  bq_ = store->Bias(prefix + ".bq", d_model);
  bk_ = store->Bias(prefix + ".bk", d_model);
  bv_ = store->Bias(prefix + ".bv", d_model);
  bo_ = store->Bias(prefix + ".bo", d_model);
  if (rel_pos_k_ >= 0) {
    rel_bias_ =
        store->ZeroTable(prefix + ".rel_bias", 2 * rel_pos_k_ + 1, n_heads);
  }
}

Tensor MultiHeadAttention::Forward(const Tensor& q_in, const Tensor& k_in,
                                   const Tensor& v_in,
                                   const AttnMask& mask) const {
  const int n_q = q_in.rows();
  const int n_k = k_in.rows();
  CheckContract(q_in.cols() == d_model_ && k_in.cols() == d_model_ &&
                    v_in.cols() == d_model_,
                "MultiHeadAttention: input width != d_model");
  CheckContract(v_in.rows() == n_k,
                "MultiHeadAttention: key/value row mismatch");
  CheckContract(mask.n_q == n_q && mask.n_k == n_k,
                "MultiHeadAttention: mask shape mismatch");
  for (int i = 0; i < n_q; ++i) {
    bool any = false;
    for (int j = 0; j < n_k && !any; ++j) any = mask.at(i, j) != 0;
    CheckContract(any, "MultiHeadAttention: query row " + std::to_string(i) +
                           " is fully masked");
  }

  Tensor q = ops::Add(ops::MatMul(q_in, wq_), bq_);
  Tensor k = ops::Add(ops::MatMul(k_in, wk_), bk_);
  Tensor v = ops::Add(ops::MatMul(v_in, wv_), bv_);

  // Disallowed positions for MaskedFill (which replaces; scores stay tiny
  // next to 1e9, so this realizes the additive -1e9 bias).
  std::vector<uint8_t> disallowed(mask.allowed.size());
  for (size_t i = 0; i < mask.allowed.size(); ++i) {
    disallowed[i] = mask.allowed[i] ? 0 : 1;
  }

  // Relative-position ids, shared across heads.
  std::vector<int> rel_ids;
  if (rel_pos_k_ >= 0) {
    rel_ids.resize(static_cast<size_t>(n_q) * n_k);
    for (int i = 0; i < n_q; ++i) {
      for (int j = 0; j < n_k; ++j) {
        const int d = std::clamp(j - i, -rel_pos_k_, rel_pos_k_);
        rel_ids[static_cast<size_t>(i) * n_k + j] = d + rel_pos_k_;
      }
    }
  }

  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(d_k_));
  std::vector<Tensor> heads;
  heads.reserve(n_heads_);
  for (int h = 0; h < n_heads_; ++h) {
    Tensor qh = ops::Slice(q, 0, n_q, h * d_k_, (h + 1) * d_k_);
    Tensor kh = ops::Slice(k, 0, n_k, h * d_k_, (h + 1) * d_k_);
    Tensor vh = ops::Slice(v, 0, n_k, h * d_k_, (h + 1) * d_k_);
    Tensor scores =
        ops::Scale(ops::MatMul(qh, ops::Transpose(kh)), inv_sqrt_dk);
    if (rel_pos_k_ >= 0) {
      Tensor bias = ops::Reshape(
          ops::GatherCols(ops::Embedding(rel_ids, rel_bias_), {h}),
          Shape({n_q, n_k}));
      scores = ops::Add(scores, bias);
    }
    Tensor attn;
    if (g_literal_mask_mode) {
      // Literal formulation: mask multiplies the softmax output elementwise.
      Tensor mask_t = Tensor::Zeros(Shape({n_q, n_k}));
      for (size_t i = 0; i < mask.allowed.size(); ++i) {
        mask_t.data()[i] = mask.allowed[i] ? 1.0 : 0.0;
      }
      attn = ops::Mul(ops::Softmax(scores), mask_t);
    } else {
      attn = ops::Softmax(ops::MaskedFill(scores, disallowed, kMaskBias));
    }
    heads.push_back(ops::MatMul(attn, vh));
  }

  Tensor concat = n_heads_ == 1 ? heads[0] : ops::Concat(heads, 1);
  return ops::Add(ops::MatMul(concat, wo_), bo_);
}

}  // namespace cassnat
