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

#include "cassnat/util/config.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "cassnat/util/common.h"

namespace cassnat {
namespace {

// Typed field access over one JSON object: every read marks its key, and
// Finish() rejects whatever was never asked for, naming the full path.
class StrictObject {
 public:
  StrictObject(const nlohmann::json& j, std::string path)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw ConfigError(path_ + " must be a JSON object " +
                        "(see docs/config-schema.json)");
    }
  }

  bool Has(const std::string& key) const { return j_.contains(key); }

  const nlohmann::json* Child(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    seen_.insert(key);
    return &j_.at(key);
  }

  void Get(const std::string& key, std::string* out) {
    if (const nlohmann::json* v = Child(key)) {
      Require(v->is_string(), key, "a string");
      *out = v->get<std::string>();
    }
  }
  void Get(const std::string& key, bool* out) {
    if (const nlohmann::json* v = Child(key)) {
      Require(v->is_boolean(), key, "a boolean");
      *out = v->get<bool>();
    }
  }
  void Get(const std::string& key, int* out) {
    if (const nlohmann::json* v = Child(key)) {
      Require(v->is_number_integer(), key, "an integer");
      *out = v->get<int>();
    }
  }
  void Get(const std::string& key, uint64_t* out) {
    if (const nlohmann::json* v = Child(key)) {
      Require(v->is_number_integer() && !v->is_number_float() &&
                  v->get<int64_t>() >= 0,
              key, "a non-negative integer");
      *out = v->get<uint64_t>();
    }
  }
  void Get(const std::string& key, double* out) {
    if (const nlohmann::json* v = Child(key)) {
      Require(v->is_number(), key, "a number");
      *out = v->get<double>();
    }
  }

  void Finish() const {
    for (const auto& [key, value] : j_.items()) {
      (void)value;
      if (!seen_.count(key)) {
        throw ConfigError("unknown key \"" + path_ + "." + key +
                          "\" (see docs/config-schema.json)");
      }
    }
  }

 private:
  void Require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) {
      throw ConfigError("\"" + path_ + "." + key + "\" must be " + what +
                        " (see docs/config-schema.json)");
    }
  }

  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void ParseCorpusSection(const nlohmann::json& j, ExperimentConfig* out) {
  StrictObject obj(j, "corpus");
  obj.Get("path", &out->corpus_path);
  if (const nlohmann::json* spec = obj.Child("spec")) {
    out->has_synth_spec = true;
    StrictObject s(*spec, "corpus.spec");
    s.Get("vocab_size", &out->synth_spec.vocab_size);
    s.Get("feat_dim", &out->synth_spec.feat_dim);
    s.Get("min_duration", &out->synth_spec.min_duration);
    s.Get("max_duration", &out->synth_spec.max_duration);
    s.Get("min_length", &out->synth_spec.min_length);
    s.Get("max_length", &out->synth_spec.max_length);
    s.Get("num_train", &out->synth_spec.num_train);
    s.Get("num_dev", &out->synth_spec.num_dev);
    s.Get("num_test", &out->synth_spec.num_test);
    s.Get("noise_sigma", &out->synth_spec.noise_sigma);
    s.Get("seed", &out->synth_spec.seed);
    s.Finish();
  }
  obj.Finish();
}

void ParseModelSection(const nlohmann::json& j, ExperimentConfig* out) {
  StrictObject m(j, "model");
  out->model_vocab_explicit = m.Has("vocab_size");
  out->model_feat_explicit = m.Has("feat_dim");
  m.Get("feat_dim", &out->model.feat_dim);
  m.Get("vocab_size", &out->model.vocab_size);
  m.Get("d_model", &out->model.d_model);
  m.Get("n_heads", &out->model.n_heads);
  m.Get("d_ff", &out->model.d_ff);
  m.Get("num_encoder_blocks", &out->model.num_encoder_blocks);
  m.Get("num_sad", &out->model.num_sad);
  m.Get("num_mad", &out->model.num_mad);
  m.Get("at_decoder_blocks", &out->model.at_decoder_blocks);
  m.Get("conv_kernel", &out->model.conv_kernel);
  m.Get("encoder_conv", &out->model.encoder_conv);
  m.Get("decoder_conv", &out->model.decoder_conv);
  m.Get("rel_pos_k", &out->model.rel_pos_k);
  m.Get("dropout", &out->model.dropout);
  m.Get("trigger_expansion", &out->model.trigger_expansion);
  m.Get("mad_self_mask", &out->model.mad_self_mask);
  m.Get("mad_src_mask", &out->model.mad_src_mask);
  m.Get("encoder_tap", &out->model.encoder_tap);
  m.Get("mad_tap", &out->model.mad_tap);
  m.Finish();
}

void ParseLossSection(const nlohmann::json& j, ExperimentConfig* out) {
  StrictObject l(j, "loss");
  l.Get("lambda_ctc_global", &out->loss.lambda_ctc_global);
  l.Get("lambda_ce", &out->loss.lambda_ce);
  l.Get("lambda_ctc", &out->loss.lambda_ctc);
  l.Get("at_ctc_weight", &out->loss.at_ctc_weight);
  l.Get("label_smoothing", &out->loss.label_smoothing);
  l.Finish();
}

void ParseScheduleSection(const nlohmann::json& j, ExperimentConfig* out) {
  StrictObject s(j, "schedule");
  s.Get("warmup_steps", &out->schedule.warmup_steps);
  s.Get("peak_lr", &out->schedule.peak_lr);
  s.Get("floor_lr", &out->schedule.floor_lr);
  s.Get("decay_steps", &out->schedule.decay_steps);
  s.Finish();
}

void ParseTrainSection(const nlohmann::json& j, ExperimentConfig* out) {
  StrictObject t(j, "train");
  t.Get("max_epochs", &out->train.max_epochs);
  t.Get("batch_size", &out->train.batch_size);
  t.Get("ctc_only_epochs", &out->train.ctc_only_epochs);
  t.Get("average_last", &out->train.average_last);
  t.Get("early_stop_patience", &out->train.early_stop_patience);
  t.Get("seed", &out->train.seed);
  t.Get("sort_batches_by_length", &out->train.sort_batches_by_length);
  t.Finish();
}

void ParseDecodeSection(const nlohmann::json& j, ExperimentConfig* out) {
  StrictObject d(j, "decode");
  d.Get("method", &out->decode.method);
  d.Get("tau", &out->decode.tau);
  d.Get("samples", &out->decode.num_samples);
  d.Get("beam_width", &out->decode.beam_width);
  d.Get("seed", &out->decode.seed);
  d.Get("score_collapsed", &out->decode.score_collapsed);
  d.Get("threads", &out->decode.num_threads);
  d.Finish();
}

}  // namespace

void ExperimentConfig::Validate() const {
  try {
    if (has_synth_spec) synth_spec.Validate();
    model.Validate();
    loss.Validate();
    schedule.Validate();
    train.Validate();
    decode.Validate();
  } catch (const ContractError& e) {
    // Range violations surface as config problems, pointing at the schema.
    throw ConfigError(std::string(e.what()) +
                      " (see docs/config-schema.json)");
  }
}

ExperimentConfig ParseExperimentConfig(const nlohmann::json& root) {
  ExperimentConfig out;
  StrictObject top(root, "config");
  top.Get("output_dir", &out.output_dir);
  if (const nlohmann::json* corpus = top.Child("corpus")) {
    ParseCorpusSection(*corpus, &out);
  }
  if (const nlohmann::json* model = top.Child("model")) {
    ParseModelSection(*model, &out);
  }
  if (const nlohmann::json* loss = top.Child("loss")) {
    ParseLossSection(*loss, &out);
  }
  if (const nlohmann::json* schedule = top.Child("schedule")) {
    ParseScheduleSection(*schedule, &out);
  }
  if (const nlohmann::json* train = top.Child("train")) {
    ParseTrainSection(*train, &out);
  }
  if (const nlohmann::json* decode = top.Child("decode")) {
    ParseDecodeSection(*decode, &out);
  }
  top.Finish();
  if (out.output_dir.empty()) {
    throw ConfigError("\"output_dir\" is required "
                      "(see docs/config-schema.json)");
  }
  out.Validate();
  return out;
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw MissingInputError("config file not found: " + path);
  }
  std::ifstream in(path);
  CheckContract(in.good(), "cannot open config file: " + path);
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return ParseExperimentConfig(root);
}

nlohmann::json ExperimentConfigToJson(const ExperimentConfig& config) {
  nlohmann::json j;
  j["output_dir"] = config.output_dir;

  nlohmann::json corpus;
  if (!config.corpus_path.empty()) corpus["path"] = config.corpus_path;
  if (config.has_synth_spec) {
    const SynthSpec& s = config.synth_spec;
    corpus["spec"] = {
        {"vocab_size", s.vocab_size},   {"feat_dim", s.feat_dim},
        {"min_duration", s.min_duration}, {"max_duration", s.max_duration},
        {"min_length", s.min_length},   {"max_length", s.max_length},
        {"num_train", s.num_train},     {"num_dev", s.num_dev},
        {"num_test", s.num_test},       {"noise_sigma", s.noise_sigma},
        {"seed", s.seed}};
  }
  j["corpus"] = corpus;

  const ModelConfig& m = config.model;
  j["model"] = {{"feat_dim", m.feat_dim},
                {"vocab_size", m.vocab_size},
                {"d_model", m.d_model},
                {"n_heads", m.n_heads},
                {"d_ff", m.d_ff},
                {"num_encoder_blocks", m.num_encoder_blocks},
                {"num_sad", m.num_sad},
                {"num_mad", m.num_mad},
                {"at_decoder_blocks", m.at_decoder_blocks},
                {"conv_kernel", m.conv_kernel},
                {"encoder_conv", m.encoder_conv},
                {"decoder_conv", m.decoder_conv},
                {"rel_pos_k", m.rel_pos_k},
                {"dropout", m.dropout},
                {"trigger_expansion", m.trigger_expansion},
                {"mad_self_mask", m.mad_self_mask},
                {"mad_src_mask", m.mad_src_mask},
                {"encoder_tap", m.encoder_tap},
                {"mad_tap", m.mad_tap}};

  const LossWeights& w = config.loss;
  j["loss"] = {{"lambda_ctc_global", w.lambda_ctc_global},
               {"lambda_ce", w.lambda_ce},
               {"lambda_ctc", w.lambda_ctc},
               {"at_ctc_weight", w.at_ctc_weight},
               {"label_smoothing", w.label_smoothing}};

  const ScheduleConfig& s = config.schedule;
  j["schedule"] = {{"warmup_steps", s.warmup_steps},
                   {"peak_lr", s.peak_lr},
                   {"floor_lr", s.floor_lr},
                   {"decay_steps", s.decay_steps}};

  const TrainConfig& t = config.train;
  j["train"] = {{"max_epochs", t.max_epochs},
                {"batch_size", t.batch_size},
                {"ctc_only_epochs", t.ctc_only_epochs},
                {"average_last", t.average_last},
                {"early_stop_patience", t.early_stop_patience},
                {"seed", t.seed},
                {"sort_batches_by_length", t.sort_batches_by_length}};

  const DecodeOptions& d = config.decode;
  j["decode"] = {{"method", d.method},
                 {"tau", d.tau},
                 {"samples", d.num_samples},
                 {"beam_width", d.beam_width},
                 {"seed", d.seed},
                 {"score_collapsed", d.score_collapsed},
                 {"threads", d.num_threads}};
  return j;
}

}  // namespace cassnat
