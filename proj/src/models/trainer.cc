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

#include "cassnat/models/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>

#include <json.hpp>

#include "cassnat/ctc/ctc.h"
#include "cassnat/data/batch.h"
#include "cassnat/eval/metrics.h"
#include "cassnat/numcore/checkpoint.h"
#include "cassnat/util/common.h"
#include "cassnat/util/rng.h"

namespace cassnat {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.98;
constexpr double kAdamEps = 1e-9;
constexpr uint64_t kDropoutSalt = 0x44524F50ULL;  // per-epoch dropout stream

std::string EpochCheckpointPath(const std::string& dir, int epoch) {
  char name[32];
  std::snprintf(name, sizeof(name), "epoch_%03d.ckpt", epoch);
  return dir + "/" + name;
}

}  // namespace

Trainer::Trainer(ParamStore* store, const TrainConfig& train_cfg,
                 const ScheduleConfig& schedule, UttLossFn utt_loss,
                 DevMetricFn dev_metric)
    : store_(store),
      cfg_(train_cfg),
      sched_(schedule),
      utt_loss_(std::move(utt_loss)),
      dev_metric_(std::move(dev_metric)) {
  cfg_.Validate();
  sched_.Validate();
  for (const auto& [name, tensor] : store_->params()) {
    names_.push_back(name);
    params_.push_back(tensor);
    adam_m_.emplace_back(tensor.numel(), 0.0);
    adam_v_.emplace_back(tensor.numel(), 0.0);
  }
}

void Trainer::AdamStep(double lr, int64_t step) {
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
  for (size_t i = 0; i < params_.size(); ++i) {
    Tensor& t = params_[i];
    const std::vector<double>* g = t.has_grad() ? &t.grad() : nullptr;
    std::vector<double>& m = adam_m_[i];
    std::vector<double>& v = adam_v_[i];
    std::vector<double>& data = t.data();
    for (size_t j = 0; j < data.size(); ++j) {
      const double gj = g ? (*g)[j] : 0.0;
      m[j] = kBeta1 * m[j] + (1.0 - kBeta1) * gj;
      v[j] = kBeta2 * v[j] + (1.0 - kBeta2) * gj * gj;
      data[j] -= lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + kAdamEps);
    }
  }
}

TrainResult Trainer::Train(const Corpus& corpus, bool resume) {
  CheckContract(!cfg_.checkpoint_dir.empty(),
                "trainer: checkpoint_dir is required");
  const std::string& dir = cfg_.checkpoint_dir;
  fs::create_directories(dir);
  const std::string state_path = dir + "/state.json";
  const std::string optim_path = dir + "/optim.ckpt";

  TrainResult result;
  double best = std::numeric_limits<double>::infinity();
  int bad_epochs = 0;
  int start_epoch = 1;
  int64_t step = 0;
  std::vector<std::string> saved;

  bool resumed = false;
  if (resume && fs::exists(state_path)) {
    std::ifstream in(state_path);
    json state = json::parse(in);
    start_epoch = state.at("epoch").get<int>() + 1;
    step = state.at("step").get<int64_t>();
    best = state.at("best_dev_wer").get<double>();
    bad_epochs = state.at("bad_epochs").get<int>();
    saved = state.at("saved").get<std::vector<std::string>>();
    result.loss_curve = state.at("loss_curve").get<std::vector<double>>();
    result.dev_wer_curve =
        state.at("dev_wer_curve").get<std::vector<double>>();
    result.skipped_utterances = state.at("skipped").get<int>();
    CheckContract(!saved.empty(), "trainer: resume state lists no checkpoint");
    store_->FromEntries(LoadCheckpoint(saved.back()));

    std::map<std::string, std::vector<double>> moments;
    for (CheckpointEntry& entry : LoadCheckpoint(optim_path)) {
      moments[entry.name] = std::move(entry.values);
    }
    for (size_t i = 0; i < names_.size(); ++i) {
      auto m_it = moments.find("adam.m." + names_[i]);
      auto v_it = moments.find("adam.v." + names_[i]);
      CheckContract(m_it != moments.end() && v_it != moments.end() &&
                        m_it->second.size() == adam_m_[i].size() &&
                        v_it->second.size() == adam_v_[i].size(),
                    "trainer: optimizer state does not match the model");
      adam_m_[i] = std::move(m_it->second);
      adam_v_[i] = std::move(v_it->second);
    }
    resumed = true;
  }

  std::ofstream log;
  if (!cfg_.log_path.empty()) {
    log.open(cfg_.log_path, resumed ? std::ios::app : std::ios::trunc);
    CheckContract(log.good(), "trainer: cannot open the step log");
  }

  int last_epoch = start_epoch - 1;
  for (int epoch = start_epoch; epoch <= cfg_.max_epochs; ++epoch) {
    last_epoch = epoch;
    Rng dropout_rng(
        Rng::Mix(Rng::Mix(cfg_.seed, kDropoutSalt), static_cast<uint64_t>(epoch)));
    const bool ctc_only = epoch <= cfg_.ctc_only_epochs;
    const std::vector<Batch> batches =
        MakeBatches(corpus.train, cfg_.batch_size,
                    cfg_.sort_batches_by_length, cfg_.seed, epoch);

    for (const Batch& batch : batches) {
      store_->ZeroGrads();
      int contributing = 0;
      int length_errors = 0;
      double sum_loss = 0.0, sum_ctc_f = 0.0, sum_ctc_m = 0.0;
      double sum_ce_f = 0.0, sum_ce_m = 0.0;
      for (int i = 0; i < batch.batch_size; ++i) {
        const TrainCtx ctx{&dropout_rng};
        const LossOut lo = utt_loss_(batch.UtteranceFeatures(i),
                                     batch.targets[i], ctc_only, ctx);
        if (!lo.feasible) {
          ++result.skipped_utterances;
          continue;
        }
        if (!std::isfinite(lo.loss)) {
          const std::string dump_path = dir + "/abort.json";
          json dump = {{"epoch", epoch},
                       {"step", step + 1},
                       {"utt_id", batch.utt_ids[i]},
                       {"loss", lo.loss},
                       {"ctc_final", lo.ctc_final},
                       {"ctc_mid", lo.ctc_mid},
                       {"ce_final", lo.ce_final},
                       {"ce_mid", lo.ce_mid}};
          std::ofstream(dump_path) << dump.dump(2) << "\n";
          throw TrainAbortError("trainer: non-finite loss on utterance " +
                                batch.utt_ids[i] + " (diagnostics in " +
                                dump_path + ")");
        }
        Backward(lo.total);
        ++contributing;
        sum_loss += lo.loss;
        sum_ctc_f += lo.ctc_final;
        sum_ctc_m += lo.ctc_mid;
        sum_ce_f += lo.ce_final;
        sum_ce_m += lo.ce_mid;
        if (lo.length_error != 0) ++length_errors;
      }
      if (contributing == 0) continue;

      // Accumulated gradients become the batch mean before the update.
      const double inv = 1.0 / contributing;
      for (Tensor& t : params_) {
        if (!t.has_grad()) continue;
        for (double& g : t.MutableGrad()) g *= inv;
      }
      ++step;
      const double lr = sched_.LrAt(step);
      AdamStep(lr, step);

      result.loss_curve.push_back(sum_loss * inv);
      if (log.is_open()) {
        json line = {{"step", step},
                     {"lr", lr},
                     {"loss", sum_loss * inv},
                     {"ctc_final", sum_ctc_f * inv},
                     {"ctc_mid", sum_ctc_m * inv},
                     {"ce_final", sum_ce_f * inv},
                     {"ce_mid", sum_ce_m * inv},
                     {"train_lper", static_cast<double>(length_errors) * inv}};
        log << line.dump() << "\n";
        log.flush();
      }
    }

    const double dev_wer = dev_metric_(corpus.dev);
    result.dev_wer_curve.push_back(dev_wer);

    const std::string ckpt = EpochCheckpointPath(dir, epoch);
    SaveCheckpoint(ckpt, store_->ToEntries());
    saved.push_back(ckpt);

    std::vector<CheckpointEntry> optim;
    for (size_t i = 0; i < names_.size(); ++i) {
      optim.push_back({"adam.m." + names_[i], kDtypeF64,
                       params_[i].shape(), adam_m_[i]});
      optim.push_back({"adam.v." + names_[i], kDtypeF64,
                       params_[i].shape(), adam_v_[i]});
    }
    SaveCheckpoint(optim_path, optim);

    if (dev_wer < best) {
      best = dev_wer;
      bad_epochs = 0;
    } else {
      ++bad_epochs;
    }

    json state = {{"epoch", epoch},
                  {"step", step},
                  {"best_dev_wer", best},
                  {"bad_epochs", bad_epochs},
                  {"saved", saved},
                  {"loss_curve", result.loss_curve},
                  {"dev_wer_curve", result.dev_wer_curve},
                  {"skipped", result.skipped_utterances}};
    std::ofstream(state_path) << state.dump(2) << "\n";

    if (bad_epochs >= cfg_.early_stop_patience) break;
  }

  CheckContract(!saved.empty(), "trainer: no epoch completed");
  const int take =
      std::min<int>(cfg_.average_last, static_cast<int>(saved.size()));
  const std::vector<std::string> tail(saved.end() - take, saved.end());
  const std::string final_path = dir + "/final.ckpt";
  AverageCheckpoints(tail, final_path);
  store_->FromEntries(LoadCheckpoint(final_path));

  result.final_checkpoint = final_path;
  result.best_dev_wer = best;
  result.steps = step;
  result.epochs_run = last_epoch;
  return result;
}

std::vector<int> BestPathDecode(const CassNatModel& model,
                                const Utterance& utt) {
  NoGradGuard no_grad;
  const EncoderOutput enc =
      model.RunEncoder(FeatureTensor(utt), -1, TrainCtx{});
  const Alignment bpa = BestPathAlign(enc.ctc_logits);
  const CassNatOutput dec = model.RunDecoder(enc, bpa.ids, TrainCtx{});
  return ArgmaxTokens(dec.logits, model.vocab().eos_id,
                      model.vocab().blank_id);
}

Trainer MakeCassNatTrainer(CassNatModel* model, const LossWeights& weights,
                           const TrainConfig& train_cfg,
                           const ScheduleConfig& schedule) {
  auto loss = [model, weights](const Tensor& features,
                               const std::vector<int>& target, bool ctc_only,
                               const TrainCtx& ctx) {
    return model->Loss(features, target, weights, ctc_only, ctx);
  };
  auto dev = [model](const std::vector<Utterance>& utts) {
    CorpusWer wer;
    for (const Utterance& utt : utts) {
      wer.Add(utt.transcript, BestPathDecode(*model, utt));
    }
    return wer.rate();
  };
  return Trainer(&model->store(), train_cfg, schedule, loss, dev);
}

Trainer MakeAtTrainer(AtModel* model, const LossWeights& weights,
                      const TrainConfig& train_cfg,
                      const ScheduleConfig& schedule) {
  auto loss = [model, weights](const Tensor& features,
                               const std::vector<int>& target,
                               bool /*ctc_only*/, const TrainCtx& ctx) {
    return model->Loss(features, target, weights, ctx);
  };
  auto dev = [model](const std::vector<Utterance>& utts) {
    NoGradGuard no_grad;
    CorpusWer wer;
    for (const Utterance& utt : utts) {
      const EncoderOutput enc =
          model->RunEncoder(FeatureTensor(utt), -1, TrainCtx{});
      wer.Add(utt.transcript, model->Decode(enc, "greedy", 1).tokens);
    }
    return wer.rate();
  };
  return Trainer(&model->store(), train_cfg, schedule, loss, dev);
}

}  // namespace cassnat
