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

#include "cassnat/models/config.h"

#include <algorithm>
#include <cmath>

#include "cassnat/util/common.h"

namespace cassnat {

int ModelConfig::EncoderTapLayer() const {
  return encoder_tap > 0 ? encoder_tap : (num_encoder_blocks + 1) / 2;
}

int ModelConfig::MadTapLayer() const {
  if (num_mad == 0) return 0;
  return mad_tap > 0 ? mad_tap : (num_mad + 1) / 2;
}

void ModelConfig::Validate() const {
  CheckContract(feat_dim >= 1, "model config: feat_dim must be positive");
  CheckContract(vocab_size >= 3,
                "model config: vocab needs blank, EOS, and a real token");
  CheckContract(d_model >= 1 && d_ff >= 1,
                "model config: layer widths must be positive");
  CheckContract(n_heads >= 1 && d_model % n_heads == 0,
                "model config: d_model must divide evenly into heads");
  CheckContract(d_model % 2 == 0,
                "model config: d_model must be even for sinusoidal encoding");
  CheckContract(num_encoder_blocks >= 1,
                "model config: need at least one encoder block");
  CheckContract(num_sad >= 0 && num_mad >= 0 && num_sad + num_mad >= 1,
                "model config: decoder needs at least one SAD or MAD block");
  CheckContract(at_decoder_blocks >= 1,
                "model config: AT decoder needs at least one block");
  CheckContract(conv_kernel >= 1 && conv_kernel % 2 == 1,
                "model config: conv kernel must be odd");
  CheckContract(dropout >= 0.0 && dropout < 1.0,
                "model config: dropout must lie in [0, 1)");
  CheckContract(trigger_expansion >= 0,
                "model config: trigger expansion must be non-negative");
  CheckContract(mad_self_mask == "ncm" || mad_self_mask == "cm",
                "model config: mad_self_mask must be 'ncm' or 'cm'");
  CheckContract(mad_src_mask == "ncm" || mad_src_mask == "tm",
                "model config: mad_src_mask must be 'ncm' or 'tm'");
  CheckContract(encoder_tap == -1 ||
                    (encoder_tap >= 1 && encoder_tap <= num_encoder_blocks),
                "model config: encoder tap outside the block stack");
  CheckContract(mad_tap == -1 || (mad_tap >= 1 && mad_tap <= num_mad),
                "model config: MAD tap outside the block stack");
}

void LossWeights::Validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  CheckContract(unit(lambda_ctc_global) && unit(lambda_ce) &&
                    unit(lambda_ctc) && unit(at_ctc_weight),
                "loss weights: mixing weights must lie in [0, 1]");
  CheckContract(label_smoothing >= 0.0 && label_smoothing < 1.0,
                "loss weights: label smoothing must lie in [0, 1)");
}

double ScheduleConfig::LrAt(int64_t step) const {
  CheckContract(step >= 1, "schedule: steps are 1-based");
  if (step <= warmup_steps) {
    return peak_lr * static_cast<double>(step) / warmup_steps;
  }
  const double progress = std::min(
      1.0, static_cast<double>(step - warmup_steps) / decay_steps);
  return peak_lr * std::pow(floor_lr / peak_lr, progress);
}

void ScheduleConfig::Validate() const {
  CheckContract(warmup_steps >= 1, "schedule: warmup_steps must be positive");
  CheckContract(decay_steps >= 1, "schedule: decay_steps must be positive");
  CheckContract(peak_lr > 0.0 && floor_lr > 0.0 && floor_lr <= peak_lr,
                "schedule: need 0 < floor_lr <= peak_lr");
}

void TrainConfig::Validate() const {
  CheckContract(max_epochs >= 1, "train config: max_epochs must be positive");
  CheckContract(batch_size >= 1, "train config: batch_size must be positive");
  CheckContract(ctc_only_epochs >= 0,
                "train config: ctc_only_epochs must be non-negative");
  CheckContract(average_last >= 1,
                "train config: average_last must be positive");
  CheckContract(early_stop_patience >= 1,
                "train config: early_stop_patience must be positive");
}

}  // namespace cassnat
