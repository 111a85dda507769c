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

#ifndef CASSNAT_MODELS_CASSNAT_MODEL_H_
#define CASSNAT_MODELS_CASSNAT_MODEL_H_

#include <string>
#include <vector>

#include "cassnat/ctc/vocab.h"
#include "cassnat/models/config.h"
#include "cassnat/models/encoder.h"
#include "cassnat/models/losses.h"
#include "cassnat/nnet/blocks.h"
#include "cassnat/nnet/param_store.h"
#include "cassnat/numcore/tensor.h"

namespace cassnat {

struct CassNatOutput {
  Tensor logits;               // [U'+1, V]; the last row predicts EOS
  Tensor mid_logits;           // [U'+1, V] from the intermediate tap's head
  std::vector<int> collapse;   // collapse of the driving alignment (no EOS)
};

// Single-step non-autoregressive recognizer: encoder, trigger-mask extraction
// of token-level acoustic embeddings, a self-attention decoder stack over
// tokens, and a mixed-attention stack that re-reads the encoder. Every output
// position is predicted in parallel from the alignment-derived embeddings.
class CassNatModel {
 public:
  CassNatModel(const ModelConfig& cfg, const Vocabulary& vocab, uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  const Vocabulary& vocab() const { return vocab_; }
  ParamStore& store() { return store_; }
  const ParamStore& store() const { return store_; }

  EncoderOutput RunEncoder(const Tensor& features, int num_valid,
                           const TrainCtx& ctx) const;

  // alignment_ids must cover exactly the encoder frames (length == t_prime),
  // and the encoder output must be unpadded. An all-blank alignment yields a
  // single EOS output row.
  CassNatOutput RunDecoder(const EncoderOutput& enc,
                           const std::vector<int>& alignment_ids,
                           const TrainCtx& ctx) const;

  // Joint objective on one utterance: frame-normalized CTC on both encoder
  // heads plus label-smoothed CE on both decoder heads, the decoder driven by
  // the most probable alignment of the target (held constant; no gradient
  // flows through the alignment choice). ctc_only drops the CE terms during
  // warmup epochs. Infeasible targets return feasible=false.
  LossOut Loss(const Tensor& features, const std::vector<int>& target,
               const LossWeights& weights, bool ctc_only,
               const TrainCtx& ctx) const;

  // Token-position states at a named decoder stage: "taee" (the extracted
  // acoustic embeddings), "sad" (after the self-attention stack), or "mad"
  // (after the mixed-attention stack; requires at least one MAD block).
  // Rows follow the collapse-plus-EOS rule, [U'+1, d_model].
  Tensor DecoderEmbeddings(const EncoderOutput& enc,
                           const std::vector<int>& alignment_ids,
                           const std::string& level,
                           const TrainCtx& ctx) const;

 private:
  struct DecoderTrace {
    Tensor taee;
    Tensor sad;
    Tensor mad;  // equals sad when no MAD block exists
    Tensor mid;  // input of the intermediate tap head
  };
  DecoderTrace RunDecoderTrace(const EncoderOutput& enc,
                               const std::vector<int>& alignment_ids,
                               const TrainCtx& ctx) const;

  ModelConfig cfg_;
  Vocabulary vocab_;
  ParamStore store_;
  Encoder encoder_;
  Taee taee_;
  std::vector<ConformerBlock> sad_;
  std::vector<MadBlock> mad_;
  Tensor out_w_, out_b_;
  Tensor mid_w_, mid_b_;
};

// Decoder-output reading rule: per-row argmax, truncate at the first EOS,
// drop blanks, and never merge repeats (positions are conditionally
// independent, so a genuine double token must survive).
std::vector<int> ArgmaxTokens(const Tensor& logits, int eos_id, int blank_id);

}  // namespace cassnat

#endif  // CASSNAT_MODELS_CASSNAT_MODEL_H_
