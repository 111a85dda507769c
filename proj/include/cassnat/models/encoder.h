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

#ifndef CASSNAT_MODELS_ENCODER_H_
#define CASSNAT_MODELS_ENCODER_H_

#include <string>
#include <vector>

#include "cassnat/models/config.h"
#include "cassnat/nnet/blocks.h"
#include "cassnat/nnet/param_store.h"
#include "cassnat/numcore/tensor.h"

namespace cassnat {

struct EncoderOutput {
  Tensor h;               // [T', d_model] frame representations
  Tensor ctc_logits;      // [T', V] from the final head
  Tensor ctc_mid_logits;  // [T', V] from the intermediate tap's own head
  int t_prime = 0;
  int valid_frames = 0;   // rows of h that carry real input (rest is padding)
};

// Acoustic encoder: two stride-2 convolutions (4x frame-rate reduction, each
// output length ceil(T/2) of its input) with swish, sinusoidal positions,
// then a stack of self-attention blocks. CTC heads read the final block and
// an intermediate tap; the tap's projection is unused at inference.
class Encoder {
 public:
  Encoder(ParamStore* store, const std::string& prefix,
          const ModelConfig& cfg);

  // features [T, F]. Rows at and beyond num_valid are batch padding and are
  // zeroed before the convolutions so valid outputs match an unpadded run;
  // num_valid < 0 means every row is valid. Empty input is a contract error
  // (it would subsample to zero frames).
  EncoderOutput Forward(const Tensor& features, int num_valid,
                        const TrainCtx& ctx) const;

  // Frame count after the two stride-2 convolutions: ceil(ceil(t/2)/2).
  static int SubsampledLength(int t);

 private:
  ModelConfig cfg_;
  Tensor conv1_w_, conv1_b_;  // [3, F, d]
  Tensor conv2_w_, conv2_b_;  // [3, d, d]
  std::vector<ConformerBlock> blocks_;
  Tensor ctc_w_, ctc_b_;
  Tensor ctc_mid_w_, ctc_mid_b_;
};

}  // namespace cassnat

#endif  // CASSNAT_MODELS_ENCODER_H_
