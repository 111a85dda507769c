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

#ifndef CASSNAT_NNET_BLOCKS_H_
#define CASSNAT_NNET_BLOCKS_H_

#include <optional>
#include <string>
#include <vector>

#include "cassnat/nnet/attention.h"
#include "cassnat/nnet/param_store.h"
#include "cassnat/numcore/tensor.h"
#include "cassnat/util/rng.h"

namespace cassnat {

// Runtime mode for a forward pass. A null rng means inference: dropout is
// the identity and the pass is deterministic.
struct TrainCtx {
  Rng* rng = nullptr;
};

struct BlockConfig {
  int d_model = 32;
  int n_heads = 2;
  int d_ff = 64;
  int conv_kernel = 7;
  double dropout = 0.0;
  bool use_conv = true;
  bool macaron = true;
  int rel_pos_k = -1;  // < 0 disables the clipped relative-position bias

  void Validate() const;
};

// Two-layer position-wise network: swish(x w1 + b1) w2 + b2.
class FeedForward {
 public:
  FeedForward(ParamStore* store, const std::string& prefix, int d_model,
              int d_ff);
  Tensor Forward(const Tensor& x) const;

 private:
  Tensor w1_, b1_, w2_, b2_;
};

// Layer normalization with learned gain/bias.
class LayerNormLayer {
 public:
  LayerNormLayer(ParamStore* store, const std::string& prefix, int d);
  Tensor Forward(const Tensor& x) const;

 private:
  Tensor gain_, bias_;
};

// Convolution module: pointwise-GLU -> depthwise conv along time -> layer
// norm -> swish -> pointwise. Padded rows are zeroed before the depthwise
// step so junk in padding never reaches valid frames through the kernel.
class ConvModule {
 public:
  ConvModule(ParamStore* store, const std::string& prefix, int d_model,
             int kernel);
  // pad_rows: per-row flag, 1 = padding; empty means every row is valid.
  Tensor Forward(const Tensor& x, const std::vector<uint8_t>& pad_rows) const;

 private:
  int d_model_ = 0;
  Tensor w_in_, b_in_;    // pointwise to 2*d (GLU halves it back)
  Tensor w_dw_, b_dw_;    // depthwise kernel
  LayerNormLayer ln_;
  Tensor w_out_, b_out_;  // pointwise back to d
};

// Convolution-augmented self-attention block, used for encoder layers and
// (over token positions) SAD layers. Macaron form:
//   x1 = x + ½FFN1(x)
//   x2 = x1 + LN(SelfAttn(x1, mask))
//   x3 = x2 + Conv(x2)            [when use_conv]
//   out = LN(x3 + ½FFN2(x3))
// The plain variant (macaron=false) skips FFN1 and the halving:
//   x1 = x + LN(SelfAttn(x, mask));  out = LN(x1 + FFN2(x1)).
// Dropout applies to every residual branch before its add.
class ConformerBlock {
 public:
  ConformerBlock(ParamStore* store, const std::string& prefix,
                 const BlockConfig& cfg);
  Tensor Forward(const Tensor& x, const AttnMask& mask,
                 const std::vector<uint8_t>& pad_rows,
                 const TrainCtx& ctx) const;

 private:
  BlockConfig cfg_;
  std::optional<FeedForward> ffn1_;
  MultiHeadAttention attn_;
  LayerNormLayer ln_attn_;
  std::optional<ConvModule> conv_;
  FeedForward ffn2_;
  LayerNormLayer ln_final_;
};

// Mixed-attention decoder block:
//   s_hat = s + ½FFN1(s)
//   s1 = s_hat + LN(Attn(s_hat, s_hat, s_hat, self_mask))
//   s2 = s1 + Conv(s1)            [when use_conv]
//   s3 = s2 + LN(Attn(s2, h, h, src_mask))
//   out = LN(s3 + ½FFN2(s3))
class MadBlock {
 public:
  MadBlock(ParamStore* store, const std::string& prefix,
           const BlockConfig& cfg);
  Tensor Forward(const Tensor& s, const Tensor& h, const AttnMask& self_mask,
                 const AttnMask& src_mask,
                 const std::vector<uint8_t>& pad_rows,
                 const TrainCtx& ctx) const;

 private:
  BlockConfig cfg_;
  FeedForward ffn1_;
  MultiHeadAttention self_attn_;
  LayerNormLayer ln_self_;
  std::optional<ConvModule> conv_;
  MultiHeadAttention src_attn_;
  LayerNormLayer ln_src_;
  FeedForward ffn2_;
  LayerNormLayer ln_final_;
};

// Token-level acoustic embedding extractor: one source-attention layer whose
// queries are sinusoidal position encodings (one per trigger row, EOS
// included), keys/values the encoder output, mask the trigger mask.
class Taee {
 public:
  Taee(ParamStore* store, const std::string& prefix, int d_model, int n_heads);
  // h [T', d_model], tm over T' frames with U'+1 rows -> [U'+1, d_model].
  Tensor Forward(const Tensor& h, const TriggerMask& tm) const;

 private:
  int d_model_ = 0;
  MultiHeadAttention attn_;
};

}  // namespace cassnat

#endif  // CASSNAT_NNET_BLOCKS_H_
