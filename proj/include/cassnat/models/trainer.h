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

#ifndef CASSNAT_MODELS_TRAINER_H_
#define CASSNAT_MODELS_TRAINER_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cassnat/data/corpus.h"
#include "cassnat/models/at_model.h"
#include "cassnat/models/cassnat_model.h"
#include "cassnat/models/config.h"
#include "cassnat/models/losses.h"
#include "cassnat/nnet/param_store.h"

namespace cassnat {

struct TrainResult {
  std::string final_checkpoint;       // average of the last saved checkpoints
  std::vector<double> loss_curve;     // mean batch loss per optimizer step
  std::vector<double> dev_wer_curve;  // one entry per completed epoch
  double best_dev_wer = 0.0;
  int64_t steps = 0;
  int epochs_run = 0;
  int skipped_utterances = 0;  // infeasible targets, counted and passed over
};

// Model-agnostic training loop: per-utterance losses accumulated into batch
// gradients, an adaptive-moment optimizer under the warmup/decay schedule,
// per-epoch checkpoints, dev-WER early stopping, and checkpoint averaging
// into the final model. The loop is deterministic from the seed: batches and
// dropout derive from per-(seed, epoch) streams, so resuming from a saved
// epoch reproduces a straight-through run bit for bit. A non-finite loss
// aborts after dumping diagnostics next to the checkpoints.
class Trainer {
 public:
  // Evaluates one utterance; ctc_only is set during warmup epochs.
  using UttLossFn = std::function<LossOut(
      const Tensor& features, const std::vector<int>& target, bool ctc_only,
      const TrainCtx&)>;
  // Corpus-level WER of the current weights on a dev split.
  using DevMetricFn = std::function<double(const std::vector<Utterance>&)>;

  Trainer(ParamStore* store, const TrainConfig& train_cfg,
          const ScheduleConfig& schedule, UttLossFn utt_loss,
          DevMetricFn dev_metric);

  // resume=true picks up from the latest saved state in checkpoint_dir
  // (fresh start when none exists).
  TrainResult Train(const Corpus& corpus, bool resume = false);

 private:
  void AdamStep(double lr, int64_t step);

  ParamStore* store_;
  TrainConfig cfg_;
  ScheduleConfig sched_;
  UttLossFn utt_loss_;
  DevMetricFn dev_metric_;
  std::vector<std::string> names_;  // store order, for moment persistence
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> adam_m_, adam_v_;
};

// Wires a Trainer to the non-autoregressive model: joint loss during
// training, greedy best-path decoding for the dev metric.
Trainer MakeCassNatTrainer(CassNatModel* model, const LossWeights& weights,
                           const TrainConfig& train_cfg,
                           const ScheduleConfig& schedule);

// Wires a Trainer to the autoregressive baseline: hybrid CE+CTC loss (the
// ctc_only warmup flag is ignored), greedy decoding for the dev metric.
Trainer MakeAtTrainer(AtModel* model, const LossWeights& weights,
                      const TrainConfig& train_cfg,
                      const ScheduleConfig& schedule);

// Greedy non-autoregressive decode used for the dev metric: best-path
// alignment from the CTC head drives the decoder once.
std::vector<int> BestPathDecode(const CassNatModel& model,
                                const Utterance& utt);

}  // namespace cassnat

#endif  // CASSNAT_MODELS_TRAINER_H_
