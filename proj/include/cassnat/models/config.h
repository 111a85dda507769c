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

#ifndef CASSNAT_MODELS_CONFIG_H_
#define CASSNAT_MODELS_CONFIG_H_

#include <cstdint>
#include <string>

namespace cassnat {

// Architecture description shared by the CASS-NAT model and the
// autoregressive baseline (which reuses the encoder and block geometry).
struct ModelConfig {
  int feat_dim = 8;
  int vocab_size = 12;  // includes blank (0) and EOS (1)
  int d_model = 32;
  int n_heads = 2;
  int d_ff = 64;
  int num_encoder_blocks = 2;
  int num_sad = 2;  // self-attention decoder blocks
  int num_mad = 1;  // mixed-attention decoder blocks
  int at_decoder_blocks = 2;
  int conv_kernel = 7;
  bool encoder_conv = true;   // convolution module inside encoder blocks
  bool decoder_conv = true;   // convolution module inside SAD/MAD blocks
  int rel_pos_k = 4;          // clipped relative-position range; < 0 disables
  double dropout = 0.1;
  int trigger_expansion = 1;  // contextual frames added to each trigger row
  std::string mad_self_mask = "ncm";  // "ncm" | "cm"
  std::string mad_src_mask = "ncm";   // "ncm" | "tm"
  // Intermediate-loss tap positions (1-based block index); -1 picks the
  // middle layer of the respective stack.
  int encoder_tap = -1;
  int mad_tap = -1;

  // Resolved tap positions: ceil(depth / 2) unless set explicitly. The MAD
  // tap is 0 when there are no MAD blocks (the tap then reads the SAD
  // output).
  int EncoderTapLayer() const;
  int MadTapLayer() const;

  void Validate() const;
};

// Mixing weights for the joint objectives. The two intermediate taps pair
// with their final counterparts as
//   total = lambda_ctc_global * [lambda_ctc * CTC_final
//                                + (1 - lambda_ctc) * CTC_mid]
//         + lambda_ce * CE_final + (1 - lambda_ce) * CE_mid
// and the autoregressive baseline uses
//   total = (1 - at_ctc_weight) * CE + at_ctc_weight * CTC.
struct LossWeights {
  double lambda_ctc_global = 1.0;
  double lambda_ce = 0.99;
  double lambda_ctc = 0.5;
  double at_ctc_weight = 0.3;
  double label_smoothing = 0.1;  // on CE terms only, never on CTC

  void Validate() const;
};

// Warmup-then-decay learning-rate schedule: linear ramp to peak_lr over
// warmup_steps, then exponential decay reaching floor_lr after decay_steps
// more steps (and clamped there).
struct ScheduleConfig {
  int warmup_steps = 500;
  double peak_lr = 1e-3;
  double floor_lr = 1e-5;
  int decay_steps = 2000;

  // Deterministic function of the 1-based optimizer step.
  double LrAt(int64_t step) const;

  void Validate() const;
};

// Training-loop knobs.
struct TrainConfig {
  int max_epochs = 20;
  int batch_size = 8;
  int ctc_only_epochs = 3;     // epochs before the CE terms switch on
  int average_last = 3;        // checkpoints averaged into the final model
  int early_stop_patience = 5; // epochs without dev-WER improvement
  uint64_t seed = 1234;
  bool sort_batches_by_length = true;
  std::string checkpoint_dir;  // required by Trainer::Train
  std::string log_path;        // per-step JSON-lines log; empty disables

  void Validate() const;
};

}  // namespace cassnat

#endif  // CASSNAT_MODELS_CONFIG_H_
