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

#ifndef CASSNAT_MODELS_AT_MODEL_H_
#define CASSNAT_MODELS_AT_MODEL_H_

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

struct AtDecodeResult {
  std::vector<int> tokens;  // real token ids; BOS/EOS stripped
  double score = 0.0;       // teacher-forced log-probability of tokens + EOS
};

// Autoregressive hybrid baseline: the same encoder geometry as the
// non-autoregressive model, a causal token decoder over word embeddings
// (BOS reuses the EOS id), and a CTC head mixed into the objective. Also
// serves as the scoring model that ranks sampled alignments at inference.
class AtModel {
 public:
  AtModel(const ModelConfig& cfg, const Vocabulary& vocab, uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  const Vocabulary& vocab() const { return vocab_; }
  ParamStore& store() { return store_; }
  const ParamStore& store() const { return store_; }

  EncoderOutput RunEncoder(const Tensor& features, int num_valid,
                           const TrainCtx& ctx) const;

  // Teacher-forced decoder pass: row i predicts target[i] from the embedded
  // prefix [BOS, target[0..i-1]]; the final row predicts EOS. Returns
  // [len(target)+1, V] logits.
  Tensor ForwardTeacher(const EncoderOutput& enc,
                        const std::vector<int>& target,
                        const TrainCtx& ctx) const;

  // (1 - at_ctc_weight) * label-smoothed CE + at_ctc_weight * CTC/T'.
  // An empty target is a contract error; an infeasible one (for the CTC
  // term) returns feasible=false.
  LossOut Loss(const Tensor& features, const std::vector<int>& target,
               const LossWeights& weights, const TrainCtx& ctx) const;

  // Raw summed teacher-forced log-probability of hypothesis + EOS. No length
  // normalization: length differences are part of what ranking judges. An
  // empty hypothesis scores the EOS-only continuation.
  double Score(const EncoderOutput& enc,
               const std::vector<int>& hypothesis) const;

  // Left-to-right decoding with EOS stop and a 2*T' length cap. mode is
  // "greedy" or "beam"; beam keeps beam_width prefixes by summed
  // log-probability. The returned score is the teacher-forced score of the
  // final hypothesis.
  AtDecodeResult Decode(const EncoderOutput& enc, const std::string& mode,
                        int beam_width) const;

 private:
  ModelConfig cfg_;
  Vocabulary vocab_;
  ParamStore store_;
  Encoder encoder_;
  Tensor embed_;  // [V, d_model]
  std::vector<MadBlock> blocks_;
  Tensor out_w_, out_b_;
};

}  // namespace cassnat

#endif  // CASSNAT_MODELS_AT_MODEL_H_
