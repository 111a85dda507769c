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

#include "cassnat/models/cassnat_model.h"

#include <algorithm>

#include "cassnat/ctc/ctc.h"
#include "cassnat/numcore/ops.h"
#include "cassnat/util/common.h"

namespace cassnat {
namespace {

BlockConfig DecoderBlockConfig(const ModelConfig& cfg) {
  BlockConfig bc;
  bc.d_model = cfg.d_model;
  bc.n_heads = cfg.n_heads;
  bc.d_ff = cfg.d_ff;
  bc.conv_kernel = cfg.conv_kernel;
  bc.dropout = cfg.dropout;
  bc.use_conv = cfg.decoder_conv;
  bc.macaron = true;
  bc.rel_pos_k = cfg.rel_pos_k;
  return bc;
}

}  // namespace

CassNatModel::CassNatModel(const ModelConfig& cfg, const Vocabulary& vocab,
                           uint64_t seed)
    : cfg_(cfg),
      vocab_(vocab),
      store_(seed),
      encoder_(&store_, "enc", cfg_),
      taee_(&store_, "taee", cfg_.d_model, cfg_.n_heads) {
  vocab_.Validate();
  CheckContract(vocab_.size() == cfg_.vocab_size,
                "cassnat: vocabulary size disagrees with the config");

  const BlockConfig bc = DecoderBlockConfig(cfg_);
  sad_.reserve(cfg_.num_sad);
  for (int i = 0; i < cfg_.num_sad; ++i) {
    sad_.emplace_back(&store_, "sad" + std::to_string(i), bc);
  }
  mad_.reserve(cfg_.num_mad);
  for (int i = 0; i < cfg_.num_mad; ++i) {
    mad_.emplace_back(&store_, "mad" + std::to_string(i), bc);
  }
  out_w_ = store_.Matrix("dec.out.w", cfg_.d_model, cfg_.vocab_size);
  out_b_ = store_.Bias("dec.out.b", cfg_.vocab_size);
  mid_w_ = store_.Matrix("dec.mid.w", cfg_.d_model, cfg_.vocab_size);
  mid_b_ = store_.Bias("dec.mid.b", cfg_.vocab_size);
}

EncoderOutput CassNatModel::RunEncoder(const Tensor& features, int num_valid,
                                       const TrainCtx& ctx) const {
  return encoder_.Forward(features, num_valid, ctx);
}

CassNatModel::DecoderTrace CassNatModel::RunDecoderTrace(
    const EncoderOutput& enc, const std::vector<int>& alignment_ids,
    const TrainCtx& ctx) const {
  CheckContract(enc.valid_frames == enc.t_prime,
                "cassnat decoder: encoder output must be unpadded");
  CheckContract(static_cast<int>(alignment_ids.size()) == enc.t_prime,
                "cassnat decoder: alignment must cover the encoder frames");

  const TriggerMask tm =
      BuildTriggerMask(alignment_ids, vocab_.blank_id, cfg_.trigger_expansion);
  const int rows = tm.num_rows();

  DecoderTrace trace;
  Tensor s = taee_.Forward(enc.h, tm);
  trace.taee = s;

  const AttnMask ncm = AttnMask::Full(rows, rows);
  for (const ConformerBlock& block : sad_) {
    s = block.Forward(s, ncm, {}, ctx);
  }
  trace.sad = s;

  const AttnMask self_mask =
      cfg_.mad_self_mask == "cm" ? AttnMask::Causal(rows) : ncm;
  const AttnMask src_mask = cfg_.mad_src_mask == "tm"
                                ? AttnMask::FromTrigger(tm)
                                : AttnMask::Full(rows, enc.t_prime);
  Tensor mid = s;  // the tap reads the SAD output when no MAD block exists
  for (size_t i = 0; i < mad_.size(); ++i) {
    s = mad_[i].Forward(s, enc.h, self_mask, src_mask, {}, ctx);
    if (static_cast<int>(i) + 1 == cfg_.MadTapLayer()) mid = s;
  }
  trace.mad = s;
  trace.mid = mid;
  return trace;
}

CassNatOutput CassNatModel::RunDecoder(const EncoderOutput& enc,
                                       const std::vector<int>& alignment_ids,
                                       const TrainCtx& ctx) const {
  const DecoderTrace trace = RunDecoderTrace(enc, alignment_ids, ctx);
  CassNatOutput out;
  out.logits = ops::Add(ops::MatMul(trace.mad, out_w_), out_b_);
  out.mid_logits = ops::Add(ops::MatMul(trace.mid, mid_w_), mid_b_);
  out.collapse = Collapse(alignment_ids, vocab_.blank_id);
  return out;
}

Tensor CassNatModel::DecoderEmbeddings(const EncoderOutput& enc,
                                       const std::vector<int>& alignment_ids,
                                       const std::string& level,
                                       const TrainCtx& ctx) const {
  CheckContract(level == "taee" || level == "sad" || level == "mad",
                "cassnat embeddings: level must be taee, sad, or mad");
  CheckContract(level != "mad" || cfg_.num_mad > 0,
                "cassnat embeddings: no MAD stage in this model");
  const DecoderTrace trace = RunDecoderTrace(enc, alignment_ids, ctx);
  if (level == "taee") return trace.taee;
  if (level == "sad") return trace.sad;
  return trace.mad;
}

LossOut CassNatModel::Loss(const Tensor& features,
                           const std::vector<int>& target,
                           const LossWeights& weights, bool ctc_only,
                           const TrainCtx& ctx) const {
  weights.Validate();
  for (int id : target) {
    CheckContract(id != vocab_.blank_id && id != vocab_.eos_id &&
                      id >= 0 && id < vocab_.size(),
                  "cassnat loss: target must hold real token ids only");
  }

  const EncoderOutput enc = RunEncoder(features, -1, ctx);

  LossOut out;
  if (!CtcFeasible(enc.t_prime, target)) {
    out.feasible = false;
    return out;
  }

  const Tensor ctc_f =
      ops::Scale(*CtcLogProb(enc.ctc_logits, target, vocab_),
                 -1.0 / enc.t_prime);
  const Tensor ctc_m =
      ops::Scale(*CtcLogProb(enc.ctc_mid_logits, target, vocab_),
                 -1.0 / enc.t_prime);
  const Tensor ctc_part = ops::Scale(
      ops::Add(ops::Scale(ctc_f, weights.lambda_ctc),
               ops::Scale(ctc_m, 1.0 - weights.lambda_ctc)),
      weights.lambda_ctc_global);

  {
    // Length diagnostic from the best path; argmax only, no graph involved.
    NoGradGuard no_grad;
    const Alignment bpa = BestPathAlign(enc.ctc_logits);
    out.length_error =
        static_cast<int>(Collapse(bpa.ids, vocab_.blank_id).size()) -
        static_cast<int>(target.size());
  }

  out.ctc_final = ctc_f.item();
  out.ctc_mid = ctc_m.item();

  if (ctc_only) {
    out.total = ctc_part;
    out.loss = out.total.item();
    return out;
  }

  // The most probable alignment drives the decoder as a constant: it is
  // recomputed from the current posteriors every call, but no gradient flows
  // through the choice itself.
  std::vector<int> viterbi_ids;
  {
    NoGradGuard no_grad;
    const auto viterbi = ViterbiAlign(enc.ctc_logits, target, vocab_);
    CheckContract(viterbi.has_value(),
                  "cassnat loss: feasible target must force-align");
    viterbi_ids = viterbi->ids;
  }

  const CassNatOutput dec = RunDecoder(enc, viterbi_ids, ctx);
  std::vector<int> ce_targets = target;
  ce_targets.push_back(vocab_.eos_id);
  CheckContract(dec.logits.rows() == static_cast<int>(ce_targets.size()),
                "cassnat loss: decoder rows must match target plus EOS");

  const Tensor ce_f =
      SmoothedCrossEntropy(dec.logits, ce_targets, weights.label_smoothing);
  const Tensor ce_m = SmoothedCrossEntropy(dec.mid_logits, ce_targets,
                                           weights.label_smoothing);
  const Tensor ce_part = ops::Add(ops::Scale(ce_f, weights.lambda_ce),
                                  ops::Scale(ce_m, 1.0 - weights.lambda_ce));

  out.total = ops::Add(ctc_part, ce_part);
  out.loss = out.total.item();
  out.ce_final = ce_f.item();
  out.ce_mid = ce_m.item();
  return out;
}

std::vector<int> ArgmaxTokens(const Tensor& logits, int eos_id, int blank_id) {
  CheckContract(logits.rank() == 2, "argmax tokens: logits must be 2-D");
  std::vector<int> tokens;
  for (int r = 0; r < logits.rows(); ++r) {
    int best = 0;
    double best_val = logits.at2(r, 0);
    for (int c = 1; c < logits.cols(); ++c) {
      if (logits.at2(r, c) > best_val) {
        best_val = logits.at2(r, c);
        best = c;
      }
    }
    if (best == eos_id) break;
    if (best != blank_id) tokens.push_back(best);
  }
  return tokens;
}

}  // namespace cassnat
