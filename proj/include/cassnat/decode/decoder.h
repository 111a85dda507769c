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

#ifndef CASSNAT_DECODE_DECODER_H_
#define CASSNAT_DECODE_DECODER_H_

#include <string>
#include <vector>

#include "cassnat/data/corpus.h"
#include "cassnat/eval/metrics.h"
#include "cassnat/models/at_model.h"
#include "cassnat/models/cassnat_model.h"

namespace cassnat {

// One candidate's pair of scores: the non-autoregressive decoder's own
// confidence (summed log-probability of the chosen tokens, EOS included)
// and the ranking score used for selection (the scoring model's sequence
// log-probability when a scorer is supplied, the confidence otherwise).
struct CandidateScore {
  double confidence = 0.0;
  double ranking = 0.0;
};

struct DecodeResult {
  std::string utt_id;
  std::vector<int> hypothesis;  // surface tokens: never blank, never EOS
  std::string source;           // oracle|bpa|bsa|esa|at_greedy|at_beam
  std::vector<int> alignment;   // frame-level ids behind the chosen
                                // hypothesis; empty for at_* sources
  std::vector<CandidateScore> candidate_scores;  // one per generated
                                                 // candidate, sample order
  int selected = 0;             // index of the winning candidate
  double wall_time_s = 0.0;     // encoder + alignment generation + decoder
                                // forward + scoring
};

struct DecodeOptions {
  std::string method = "bpa";  // oracle|bpa|bsa|esa|at_greedy|at_beam
  double tau = 0.9;            // ESA confidence threshold
  int num_samples = 50;        // ESA sample count S
  int beam_width = 10;         // bsa and at_beam
  uint64_t seed = 0;           // base seed; per-utterance streams are
                               // derived from it and the utterance index
  bool score_collapsed = false;  // rank collapse(alignment) instead of the
                                 // decoded hypothesis
  int num_threads = 0;         // utterance-level parallelism in DecodeCorpus;
                               // <= 0 uses the hardware concurrency

  void Validate() const;
};

struct CorpusDecodeSummary {
  double wer = 0.0;
  EditCounts edits;
  double mr = 0.0;    // NaN when the method produces no alignments
  double lper = 0.0;  // NaN when the method produces no alignments
  double mean_wall_time_s = 0.0;
  double speedup_vs_baseline = 0.0;  // baseline mean / this mean; 0 if no
                                     // baseline was given
  int num_utterances = 0;
  int num_oracle_feasible = 0;  // utterances the diagnostics could cover
};

struct CorpusDecodeResult {
  std::vector<DecodeResult> results;  // sorted by utt_id
  CorpusDecodeSummary summary;
};

// Runs the single-step decoder on one alignment and reads the hypothesis
// off the per-position argmax: positions after the first EOS are dropped,
// blanks never surface. Deterministic given weights and alignment.
std::vector<int> DecodeWithAlignment(const CassNatModel& model,
                                     const Tensor& features,
                                     const std::vector<int>& alignment_ids);

// Decodes one utterance with the configured method. `scorer` is the
// autoregressive model: required for esa (ranking) and for the at_*
// methods (where it is the decoding model and `model` may be null);
// optional elsewhere, where it only fills in the ranking score.
// `utt_index` seeds the per-utterance sampling stream.
DecodeResult DecodeOne(const CassNatModel* model, const AtModel* scorer,
                       const Utterance& utt, const Vocabulary& vocab,
                       const DecodeOptions& opts, uint64_t utt_index);

// Decodes every utterance, pools WER, and (for alignment-producing methods)
// computes the mismatch rate and length-prediction error rate against the
// per-utterance forced alignments. `baseline_mean_time_s` > 0 fills in the
// speedup ratio. Oracle decoding requires every transcript to be present.
CorpusDecodeResult DecodeCorpus(const CassNatModel* model,
                                const AtModel* scorer,
                                const std::vector<Utterance>& utts,
                                const Vocabulary& vocab,
                                const DecodeOptions& opts,
                                double baseline_mean_time_s = 0.0);

// One JSON object per line: utt_id, method, hypothesis, ref, alignment,
// score (the winning ranking score), wall_time_s.
void WriteResultsJsonl(const std::string& path,
                       const std::vector<DecodeResult>& results,
                       const std::vector<Utterance>& utts);

// Single JSON object: wer, mr, lper, mean_time, speedup_vs_baseline,
// num_utterances. Non-finite metrics serialize as null.
void WriteSummaryJson(const std::string& path,
                      const CorpusDecodeSummary& summary);

}  // namespace cassnat

#endif  // CASSNAT_DECODE_DECODER_H_
