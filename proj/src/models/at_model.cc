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

#include "cassnat/models/at_model.h"

#include <algorithm>
#include <cmath>

#include "cassnat/ctc/ctc.h"
#include "cassnat/models/losses.h"
#include "cassnat/nnet/positional.h"
#include "cassnat/numcore/ops.h"
#include "cassnat/util/common.h"

namespace cassnat {
namespace {

// Row log-softmax computed on plain doubles (decode paths never need the
// graph).
std::vector<double> RowLogProbs(const Tensor& logits, int row) {
  const int v = logits.cols();
  double max_val = logits.at2(row, 0);
  for (int c = 1; c < v; ++c) max_val = std::max(max_val, logits.at2(row, c));
  double sum = 0.0;
  for (int c = 0; c < v; ++c) sum += std::exp(logits.at2(row, c) - max_val);
  const double log_z = max_val + std::log(sum);
  std::vector<double> logp(v);
  for (int c = 0; c < v; ++c) logp[c] = logits.at2(row, c) - log_z;
  return logp;
}

struct BeamPrefix {
  std::vector<int> tokens;
  double score = 0.0;
  bool done = false;  // reached EOS; occupies its slot without expanding
};

}  // namespace

AtModel::AtModel(const ModelConfig& cfg, const Vocabulary& vocab,
                 uint64_t seed)
    : cfg_(cfg),
      vocab_(vocab),
      store_(seed),
      encoder_(&store_, "enc", cfg_) {
  vocab_.Validate();
  CheckContract(vocab_.size() == cfg_.vocab_size,
                "at model: vocabulary size disagrees with the config");

  embed_ = store_.Matrix("dec.embed", cfg_.vocab_size, cfg_.d_model);

  BlockConfig bc;
  bc.d_model = cfg_.d_model;
  bc.n_heads = cfg_.n_heads;
  bc.d_ff = cfg_.d_ff;
  bc.conv_kernel = cfg_.conv_kernel;
  bc.dropout = cfg_.dropout;
  // A causal decoder cannot use the time convolution: the same-length kernel
  // is centered and would read future positions.
  bc.use_conv = false;
  bc.macaron = true;
  bc.rel_pos_k = cfg_.rel_pos_k;
  blocks_.reserve(cfg_.at_decoder_blocks);
  for (int i = 0; i < cfg_.at_decoder_blocks; ++i) {
    blocks_.emplace_back(&store_, "dec.block" + std::to_string(i), bc);
  }
  out_w_ = store_.Matrix("dec.out.w", cfg_.d_model, cfg_.vocab_size);
  out_b_ = store_.Bias("dec.out.b", cfg_.vocab_size);
}

EncoderOutput AtModel::RunEncoder(const Tensor& features, int num_valid,
                                  const TrainCtx& ctx) const {
  return encoder_.Forward(features, num_valid, ctx);
}

Tensor AtModel::ForwardTeacher(const EncoderOutput& enc,
                               const std::vector<int>& target,
                               const TrainCtx& ctx) const {
  for (int id : target) {
    CheckContract(id >= 0 && id < vocab_.size() && id != vocab_.blank_id,
                  "at decoder: token ids must be real tokens or EOS");
  }
  std::vector<int> input_ids;
  input_ids.reserve(target.size() + 1);
  input_ids.push_back(vocab_.eos_id);  // BOS shares the EOS embedding
  input_ids.insert(input_ids.end(), target.begin(), target.end());
  const int rows = static_cast<int>(input_ids.size());

  Tensor s = ops::Scale(ops::Embedding(input_ids, embed_),
                        std::sqrt(static_cast<double>(cfg_.d_model)));
  s = ops::Add(s, SinusoidalEncoding(rows, cfg_.d_model));

  const AttnMask self_mask = AttnMask::Causal(rows);
  const AttnMask src_mask =
      AttnMask::Full(rows, enc.t_prime, enc.valid_frames);
  for (const MadBlock& block : blocks_) {
    s = block.Forward(s, enc.h, self_mask, src_mask, {}, ctx);
  }
  return ops::Add(ops::MatMul(s, out_w_), out_b_);
}

LossOut AtModel::Loss(const Tensor& features, const std::vector<int>& target,
                      const LossWeights& weights, const TrainCtx& ctx) const {
  weights.Validate();
  CheckContract(!target.empty(), "at loss: target must not be empty");
  for (int id : target) {
    CheckContract(id != vocab_.blank_id && id != vocab_.eos_id && id >= 0 &&
                      id < vocab_.size(),
                  "at loss: target must hold real token ids only");
  }

  const EncoderOutput enc = RunEncoder(features, -1, ctx);

  LossOut out;
  if (!CtcFeasible(enc.t_prime, target)) {
    out.feasible = false;
    return out;
  }

  const Tensor ctc =
      ops::Scale(*CtcLogProb(enc.ctc_logits, target, vocab_),
                 -1.0 / enc.t_prime);

  std::vector<int> ce_targets = target;
  ce_targets.push_back(vocab_.eos_id);
  const Tensor logits = ForwardTeacher(enc, target, ctx);
  const Tensor ce =
      SmoothedCrossEntropy(logits, ce_targets, weights.label_smoothing);

  out.total = ops::Add(ops::Scale(ce, 1.0 - weights.at_ctc_weight),
                       ops::Scale(ctc, weights.at_ctc_weight));
  out.loss = out.total.item();
  out.ce_final = ce.item();
  out.ctc_final = ctc.item();
  {
    NoGradGuard no_grad;
    const Alignment bpa = BestPathAlign(enc.ctc_logits);
    out.length_error =
        static_cast<int>(Collapse(bpa.ids, vocab_.blank_id).size()) -
        static_cast<int>(target.size());
  }
  return out;
}

double AtModel::Score(const EncoderOutput& enc,
                      const std::vector<int>& hypothesis) const {
  NoGradGuard no_grad;
  const Tensor logits = ForwardTeacher(enc, hypothesis, TrainCtx{});
  std::vector<int> ce_targets = hypothesis;
  ce_targets.push_back(vocab_.eos_id);
  double score = 0.0;
  for (size_t i = 0; i < ce_targets.size(); ++i) {
    score += RowLogProbs(logits, static_cast<int>(i))[ce_targets[i]];
  }
  return score;
}

AtDecodeResult AtModel::Decode(const EncoderOutput& enc,
                               const std::string& mode,
                               int beam_width) const {
  CheckContract(mode == "greedy" || mode == "beam",
                "at decode: mode must be 'greedy' or 'beam'");
  CheckContract(mode != "beam" || beam_width >= 1,
                "at decode: beam width must be positive");
  NoGradGuard no_grad;
  const int max_len = 2 * enc.t_prime;

  AtDecodeResult result;
  if (mode == "greedy") {
    std::vector<int> tokens;
    for (int step = 0; step < max_len; ++step) {
      const Tensor logits = ForwardTeacher(enc, tokens, TrainCtx{});
      const std::vector<double> logp =
          RowLogProbs(logits, static_cast<int>(tokens.size()));
      int best = vocab_.eos_id;
      double best_val = logp[vocab_.eos_id];
      for (int v = 0; v < vocab_.size(); ++v) {
        if (v == vocab_.blank_id) continue;  // never a surface token
        if (logp[v] > best_val) {
          best_val = logp[v];
          best = v;
        }
      }
      if (best == vocab_.eos_id) break;
      tokens.push_back(best);
    }
    result.tokens = std::move(tokens);
  } else {
    // EOS-extended prefixes keep their beam slot as finished entries, so a
    // width of one reproduces the greedy chain exactly. Prefixes that hit
    // the length cap compete on their partial scores.
    std::vector<BeamPrefix> beam = {BeamPrefix{}};
    for (int step = 0; step < max_len; ++step) {
      bool any_live = false;
      std::vector<BeamPrefix> candidates;
      for (const BeamPrefix& prefix : beam) {
        if (prefix.done) {
          candidates.push_back(prefix);
          continue;
        }
        any_live = true;
        const Tensor logits = ForwardTeacher(enc, prefix.tokens, TrainCtx{});
        const std::vector<double> logp =
            RowLogProbs(logits, static_cast<int>(prefix.tokens.size()));
        for (int v = 0; v < vocab_.size(); ++v) {
          if (v == vocab_.blank_id) continue;  // never a surface token
          BeamPrefix next = prefix;
          next.score += logp[v];
          if (v == vocab_.eos_id) {
            next.done = true;
          } else {
            next.tokens.push_back(v);
          }
          candidates.push_back(std::move(next));
        }
      }
      if (!any_live) break;
      std::stable_sort(candidates.begin(), candidates.end(),
                       [](const BeamPrefix& a, const BeamPrefix& b) {
                         return a.score > b.score;
                       });
      if (static_cast<int>(candidates.size()) > beam_width) {
        candidates.resize(beam_width);
      }
      beam = std::move(candidates);
    }
    CheckContract(!beam.empty(), "at decode: no hypothesis produced");
    const auto best = std::max_element(
        beam.begin(), beam.end(),
        [](const BeamPrefix& a, const BeamPrefix& b) {
          return a.score < b.score;
        });
    result.tokens = best->tokens;
  }
  result.score = Score(enc, result.tokens);
  return result;
}

}  // namespace cassnat
