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

#ifndef CASSNAT_UTIL_CONFIG_H_
#define CASSNAT_UTIL_CONFIG_H_

#include <string>

#include <json.hpp>

#include "cassnat/data/corpus.h"
#include "cassnat/decode/decoder.h"
#include "cassnat/models/config.h"
#include "cassnat/models/trainer.h"

namespace cassnat {

// One experiment, fully described: corpus source, model, losses, schedule,
// training loop, and decoding parameters. The JSON form is strict — an
// unknown key anywhere is a ConfigError naming the offending path — and the
// schema is published at docs/config-schema.json.
struct ExperimentConfig {
  std::string output_dir;

  std::string corpus_path;      // load (or, for synth, write) this file
  bool has_synth_spec = false;  // corpus.spec was given
  SynthSpec synth_spec;

  ModelConfig model;
  bool model_vocab_explicit = false;  // vocab_size appeared in the file
  bool model_feat_explicit = false;   // feat_dim appeared in the file
  LossWeights loss;
  ScheduleConfig schedule;
  TrainConfig train;  // checkpoint_dir and log_path are derived, not keys
  DecodeOptions decode;

  // Range checks across all sections (corpus spec only when present).
  void Validate() const;
};

// Strict parse of the JSON text/file. Unknown keys, wrong types, and
// out-of-range values raise ConfigError; a missing file raises
// MissingInputError.
ExperimentConfig ParseExperimentConfig(const nlohmann::json& root);
ExperimentConfig LoadExperimentConfig(const std::string& path);

// The resolved round-trip echo: every effective value, defaults included.
nlohmann::json ExperimentConfigToJson(const ExperimentConfig& config);

}  // namespace cassnat

#endif  // CASSNAT_UTIL_CONFIG_H_
