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

#ifndef CASSNAT_DATA_CORPUS_H_
#define CASSNAT_DATA_CORPUS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "cassnat/ctc/vocab.h"

namespace cassnat {

// One utterance: features are T x F row-major. Feature values are stored in
// single precision on disk and quantized to single precision at generation
// time, so in-memory and on-disk values match bit for bit. The transcript
// holds real token ids only (never blank or EOS).
struct Utterance {
  std::string utt_id;
  int num_frames = 0;
  int feat_dim = 0;
  std::vector<double> features;
  std::vector<int> transcript;
};

// Synthetic corpus recipe. Token durations of at least four frames survive
// the encoder's 4x subsampling; the generator additionally verifies CTC
// feasibility on the subsampled length and resamples violating utterances.
struct SynthSpec {
  int vocab_size = 10;  // real tokens, excluding blank and EOS
  int feat_dim = 8;
  int min_duration = 4;
  int max_duration = 8;
  int min_length = 3;
  int max_length = 10;
  int num_train = 2000;
  int num_dev = 200;
  int num_test = 200;
  double noise_sigma = 0.3;
  uint64_t seed = 1234;

  void Validate() const;
};

struct Corpus {
  SynthSpec spec;
  Vocabulary vocab;
  // Global per-dimension statistics computed on the train split.
  std::vector<double> feat_mean;
  std::vector<double> feat_var;
  std::vector<Utterance> train, dev, test;

  const std::vector<Utterance>& split(const std::string& name) const;
};

// Generates the corpus with raw (unnormalized) features; deterministic per
// spec.seed, with disjoint streams per split and per utterance.
Corpus Synthesize(const SynthSpec& spec);

// Per-token prototype rows used by the generator, [vocab_size x feat_dim]
// row-major (row i belongs to token id i + 2). Exposed so tests can verify
// the noiseless construction.
std::vector<double> TokenPrototypes(const SynthSpec& spec);

// Single-file serialization: magic "CNC1", a JSON header (spec, vocab,
// normalization stats, split sizes), a record index, then per-utterance
// records with little-endian float32 features.
void SaveCorpus(const Corpus& corpus, const std::string& path);

// normalize=true applies (x - mean) / sqrt(var + 1e-8) per dimension using
// the stored train statistics. Throws MissingInputError if absent.
Corpus LoadCorpus(const std::string& path, bool normalize = true);

// The same per-dimension transform applied to an in-memory corpus (all
// splits, train statistics). Normalizing twice is a caller bug.
void NormalizeInPlace(Corpus* corpus);

}  // namespace cassnat

#endif  // CASSNAT_DATA_CORPUS_H_
