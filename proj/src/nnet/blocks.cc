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

#include "cassnat/nnet/blocks.h"

#include "cassnat/nnet/positional.h"
#include "cassnat/numcore/ops.h"
#include "cassnat/util/common.h"

namespace cassnat {

namespace {

// Expands a per-row padding flag to an elementwise mask for MaskedFill.
std::vector<uint8_t> RowMaskToElements(const std::vector<uint8_t>& pad_rows,
                                       int rows, int cols) {
  std::vector<uint8_t> out(static_cast<size_t>(rows) * cols, 0);
  for (int r = 0; r < rows; ++r) {
    if (pad_rows[r]) {
      std::fill_n(out.begin() + static_cast<size_t>(r) * cols, cols, 1);
    }
  }
  return out;
}

}  // namespace

void BlockConfig::Validate() const {
  CheckContract(d_model > 0 && n_heads > 0 && d_model % n_heads == 0,
                "BlockConfig: d_model must divide evenly into heads");
  CheckContract(d_ff > 0, "BlockConfig: d_ff must be positive");
  CheckContract(conv_kernel > 0 && conv_kernel % 2 == 1,
                "BlockConfig: conv_kernel must be odd");
  CheckContract(dropout >= 0.0 && dropout < 1.0,
                "BlockConfig: dropout must be in [0, 1)");
}

FeedForward::FeedForward(ParamStore* store, const std::string& prefix,
                         int d_model, int d_ff) {
  w1_ = store->Matrix(prefix + ".w1", d_model, d_ff);
  b1_ = store->Bias(prefix + ".b1", d_ff);
  w2_ = store->Matrix(prefix + ".w2", d_ff, d_model);
  b2_ = store->Bias(prefix + ".b2", d_model);
}

Tensor FeedForward::Forward(const Tensor& x) const {
  Tensor hidden = ops::Swish(ops::Add(ops::MatMul(x, w1_), b1_));
  return ops::Add(ops::MatMul(hidden, w2_), b2_);
}

LayerNormLayer::LayerNormLayer(ParamStore* store, const std::string& prefix,
                               int d) {
  gain_ = store->Ones(prefix + ".gain", d);
  bias_ = store->Bias(prefix + ".bias", d);
}

Tensor LayerNormLayer::Forward(const Tensor& x) const {
  return ops::LayerNorm(x, gain_, bias_);
}

ConvModule::ConvModule(ParamStore* store, const std::string& prefix,
                       int d_model, int kernel)
    : d_model_(d_model),
      ln_(store, prefix + ".ln", d_model) {
  CheckContract(kernel > 0 && kernel % 2 == 1,
                "ConvModule: kernel must be odd");
  w_in_ = store->Matrix(prefix + ".w_in", d_model, 2 * d_model);
  b_in_ = store->Bias(prefix + ".b_in", 2 * d_model);
  w_dw_ = store->Kernel(prefix + ".w_dw", Shape({kernel, d_model}),
                        /*fan_in=*/kernel, /*fan_out=*/kernel);
  b_dw_ = store->Bias(prefix + ".b_dw", d_model);
  w_out_ = store->Matrix(prefix + ".w_out", d_model, d_model);
  b_out_ = store->Bias(prefix + ".b_out", d_model);
}

Tensor ConvModule::Forward(const Tensor& x,
                           const std::vector<uint8_t>& pad_rows) const {
  CheckContract(x.cols() == d_model_, "ConvModule: input width mismatch");
  Tensor h = ops::Glu(ops::Add(ops::MatMul(x, w_in_), b_in_));
  if (!pad_rows.empty()) {
    CheckContract(static_cast<int>(pad_rows.size()) == x.rows(),
                  "ConvModule: pad_rows length mismatch");
    // The depthwise kernel reads across time; zero padded rows first so
    // valid outputs only ever see constants there.
    h = ops::MaskedFill(h, RowMaskToElements(pad_rows, x.rows(), d_model_),
                        0.0);
  }
  h = ops::DepthwiseConv1d(h, w_dw_, b_dw_);
  h = ops::Swish(ln_.Forward(h));
  return ops::Add(ops::MatMul(h, w_out_), b_out_);
}

ConformerBlock::ConformerBlock(ParamStore* store, const std::string& prefix,
                               const BlockConfig& cfg)
    : cfg_(cfg),
      attn_(store, prefix + ".attn", cfg.d_model, cfg.n_heads, cfg.rel_pos_k),
      ln_attn_(store, prefix + ".ln_attn", cfg.d_model),
      ffn2_(store, prefix + ".ffn2", cfg.d_model, cfg.d_ff),
      ln_final_(store, prefix + ".ln_final", cfg.d_model) {
  cfg.Validate();
  if (cfg.macaron) ffn1_.emplace(store, prefix + ".ffn1", cfg.d_model, cfg.d_ff);
  if (cfg.use_conv) conv_.emplace(store, prefix + ".conv", cfg.d_model, cfg.conv_kernel);
}

Tensor ConformerBlock::Forward(const Tensor& x, const AttnMask& mask,
                               const std::vector<uint8_t>& pad_rows,
                               const TrainCtx& ctx) const {
  auto drop = [&](const Tensor& t) {
    return ops::Dropout(t, cfg_.dropout, ctx.rng);
  };
  Tensor cur = x;
  if (cfg_.macaron) {
    cur = ops::Add(cur, drop(ops::Scale(ffn1_->Forward(cur), 0.5)));
  }
  cur = ops::Add(cur, drop(ln_attn_.Forward(attn_.Forward(cur, cur, cur, mask))));
  if (cfg_.use_conv) {
    cur = ops::Add(cur, drop(conv_->Forward(cur, pad_rows)));
  }
  Tensor ffn_out = ffn2_.Forward(cur);
  if (cfg_.macaron) ffn_out = ops::Scale(ffn_out, 0.5);
  return ln_final_.Forward(ops::Add(cur, drop(ffn_out)));
}

MadBlock::MadBlock(ParamStore* store, const std::string& prefix,
                   const BlockConfig& cfg)
    : cfg_(cfg),
      ffn1_(store, prefix + ".ffn1", cfg.d_model, cfg.d_ff),
      self_attn_(store, prefix + ".self_attn", cfg.d_model, cfg.n_heads,
                 cfg.rel_pos_k),
      ln_self_(store, prefix + ".ln_self", cfg.d_model),
      src_attn_(store, prefix + ".src_attn", cfg.d_model, cfg.n_heads),
      ln_src_(store, prefix + ".ln_src", cfg.d_model),
      ffn2_(store, prefix + ".ffn2", cfg.d_model, cfg.d_ff),
      ln_final_(store, prefix + ".ln_final", cfg.d_model) {
  cfg.Validate();
  if (cfg.use_conv) conv_.emplace(store, prefix + ".conv", cfg.d_model, cfg.conv_kernel);
}

Tensor MadBlock::Forward(const Tensor& s, const Tensor& h,
                         const AttnMask& self_mask, const AttnMask& src_mask,
                         const std::vector<uint8_t>& pad_rows,
                         const TrainCtx& ctx) const {
  auto drop = [&](const Tensor& t) {
    return ops::Dropout(t, cfg_.dropout, ctx.rng);
  };
  Tensor s_hat = ops::Add(s, drop(ops::Scale(ffn1_.Forward(s), 0.5)));
  Tensor s1 = ops::Add(
      s_hat,
      drop(ln_self_.Forward(self_attn_.Forward(s_hat, s_hat, s_hat, self_mask))));
  Tensor s2 = s1;
  if (cfg_.use_conv) {
    s2 = ops::Add(s1, drop(conv_->Forward(s1, pad_rows)));
  }
  Tensor s3 = ops::Add(
      s2, drop(ln_src_.Forward(src_attn_.Forward(s2, h, h, src_mask))));
  return ln_final_.Forward(
      ops::Add(s3, drop(ops::Scale(ffn2_.Forward(s3), 0.5))));
}

Taee::Taee(ParamStore* store, const std::string& prefix, int d_model,
           int n_heads)
    : d_model_(d_model),
      attn_(store, prefix + ".attn", d_model, n_heads) {}

Tensor Taee::Forward(const Tensor& h, const TriggerMask& tm) const {
  CheckContract(h.cols() == d_model_, "Taee: encoder width mismatch");
  CheckContract(tm.num_frames == h.rows(),
                "Taee: trigger mask frame count != encoder frames");
  Tensor queries = SinusoidalEncoding(tm.num_rows(), d_model_);
  return attn_.Forward(queries, h, h, AttnMask::FromTrigger(tm));
}

}  // namespace cassnat
