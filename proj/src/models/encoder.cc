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

#include "cassnat/models/encoder.h"

#include "cassnat/nnet/positional.h"
#include "cassnat/numcore/ops.h"
#include "cassnat/util/common.h"

namespace cassnat {
namespace {

// Element mask selecting every row at index >= first_pad over a [rows, cols]
// tensor; empty when nothing is padded.
std::vector<uint8_t> PadElements(int rows, int cols, int first_pad) {
  if (first_pad >= rows) return {};
  std::vector<uint8_t> mask(static_cast<size_t>(rows) * cols, 0);
  for (int r = first_pad; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      mask[static_cast<size_t>(r) * cols + c] = 1;
    }
  }
  return mask;
}

std::vector<uint8_t> PadRows(int rows, int first_pad) {
  std::vector<uint8_t> mask(rows, 0);
  for (int r = first_pad; r < rows; ++r) mask[r] = 1;
  return mask;
}

Tensor ZeroPadRows(const Tensor& x, int first_pad) {
  const auto mask = PadElements(x.rows(), x.cols(), first_pad);
  if (mask.empty()) return x;
  return ops::MaskedFill(x, mask, 0.0);
}

}  // namespace

int Encoder::SubsampledLength(int t) {
  const int half = (t + 1) / 2;
  return (half + 1) / 2;
}

Encoder::Encoder(ParamStore* store, const std::string& prefix,
                 const ModelConfig& cfg)
    : cfg_(cfg) {
  cfg_.Validate();
  const int d = cfg_.d_model;
  const int f = cfg_.feat_dim;
  const int v = cfg_.vocab_size;
  conv1_w_ = store->Kernel(prefix + ".sub1.w", {3, f, d}, 3 * f, d);
  conv1_b_ = store->Bias(prefix + ".sub1.b", d);
  conv2_w_ = store->Kernel(prefix + ".sub2.w", {3, d, d}, 3 * d, d);
  conv2_b_ = store->Bias(prefix + ".sub2.b", d);

  BlockConfig bc;
  bc.d_model = d;
  bc.n_heads = cfg_.n_heads;
  bc.d_ff = cfg_.d_ff;
  bc.conv_kernel = cfg_.conv_kernel;
  bc.dropout = cfg_.dropout;
  bc.use_conv = cfg_.encoder_conv;
  bc.macaron = true;
  bc.rel_pos_k = cfg_.rel_pos_k;
  blocks_.reserve(cfg_.num_encoder_blocks);
  for (int i = 0; i < cfg_.num_encoder_blocks; ++i) {
    blocks_.emplace_back(store, prefix + ".block" + std::to_string(i), bc);
  }

  ctc_w_ = store->Matrix(prefix + ".ctc.w", d, v);
  ctc_b_ = store->Bias(prefix + ".ctc.b", v);
  ctc_mid_w_ = store->Matrix(prefix + ".ctc_mid.w", d, v);
  ctc_mid_b_ = store->Bias(prefix + ".ctc_mid.b", v);
}

EncoderOutput Encoder::Forward(const Tensor& features, int num_valid,
                               const TrainCtx& ctx) const {
  CheckContract(features.defined() && features.rank() == 2,
                "encoder: features must be a [T, F] tensor");
  const int t = features.rows();
  CheckContract(features.cols() == cfg_.feat_dim,
                "encoder: feature dimension mismatch");
  if (num_valid < 0) num_valid = t;
  CheckContract(num_valid >= 1 && num_valid <= t,
                "encoder: num_valid outside [1, T]");
  CheckContract(SubsampledLength(num_valid) >= 1,
                "encoder: input subsamples to zero frames");

  // Zero batch padding before each convolution so every valid output row
  // sees exactly what it would in an unpadded run (the convolution's own
  // zero padding plays the same role at the true sequence end).
  Tensor x = ZeroPadRows(features, num_valid);
  const int half = (t + 1) / 2;
  const int half_valid = (num_valid + 1) / 2;
  x = ops::Swish(ops::Conv1d(x, conv1_w_, conv1_b_, /*stride=*/2, /*pad=*/1));
  x = ZeroPadRows(x, half_valid);
  x = ops::Swish(ops::Conv1d(x, conv2_w_, conv2_b_, /*stride=*/2, /*pad=*/1));
  const int t_prime = (half + 1) / 2;
  const int valid_prime = (half_valid + 1) / 2;
  x = ZeroPadRows(x, valid_prime);

  x = ops::Add(x, SinusoidalEncoding(t_prime, cfg_.d_model));

  const AttnMask mask = AttnMask::Full(t_prime, t_prime, valid_prime);
  const std::vector<uint8_t> pad_rows =
      valid_prime < t_prime ? PadRows(t_prime, valid_prime)
                            : std::vector<uint8_t>{};
  Tensor mid;
  for (size_t i = 0; i < blocks_.size(); ++i) {
    x = blocks_[i].Forward(x, mask, pad_rows, ctx);
    if (static_cast<int>(i) + 1 == cfg_.EncoderTapLayer()) mid = x;
  }

  EncoderOutput out;
  out.h = x;
  out.ctc_logits = ops::Add(ops::MatMul(x, ctc_w_), ctc_b_);
  out.ctc_mid_logits = ops::Add(ops::MatMul(mid, ctc_mid_w_), ctc_mid_b_);
  out.t_prime = t_prime;
  out.valid_frames = valid_prime;
  return out;
}

}  // namespace cassnat
