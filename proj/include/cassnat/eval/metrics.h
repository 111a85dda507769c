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

#ifndef CASSNAT_EVAL_METRICS_H_
#define CASSNAT_EVAL_METRICS_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cassnat {

struct EditCounts {
  int sub = 0;
  int del = 0;
  int ins = 0;
  int total() const { return sub + del + ins; }
};

// Unit-cost Levenshtein with a deterministic tie-break: substitution is
// preferred over deletion, deletion over insertion, whenever costs tie.
EditCounts EditDistance(const std::vector<int>& ref,
                        const std::vector<int>& hyp);

// (S + D + I) / max(len(ref), 1).
double Wer(const std::vector<int>& ref, const std::vector<int>& hyp);

// Corpus-pooled WER: error counts and reference tokens accumulate, and the
// rate is their ratio.
struct CorpusWer {
  EditCounts counts;
  int64_t ref_tokens = 0;
  int num_utterances = 0;

  void Add(const std::vector<int>& ref, const std::vector<int>& hyp);
  double rate() const;
};

// Mismatch rate between a candidate and an oracle alignment: both are
// collapsed, then (D + I) / max(len(oracle collapse), 1). Substitutions do
// not count.
double MismatchRate(const std::vector<int>& candidate_align,
                    const std::vector<int>& oracle_align, int blank_id);

// One utterance's alignment-level evaluation payload. Oracle-side entries
// only need utt_id and align.
struct AlignedUtt {
  std::string utt_id;
  std::vector<int> align;  // frame-level ids, may contain blanks
  std::vector<int> ref;    // reference transcript
  std::vector<int> hyp;    // decoded hypothesis
};

struct BucketStat {
  int count = 0;
  EditCounts edits;
  int64_t ref_tokens = 0;
  double wer() const;
};

struct AlignmentDiagnostics {
  double mr = 0.0;
  double lper = 0.0;
  // Keyed by len(collapse(candidate)) - len(collapse(oracle)).
  std::map<int, BucketStat> length_error_hist;
  int num_utterances = 0;
};

// Pairs candidates and oracles by utt_id (a missing or extra id on either
// side is a contract error). MR is corpus-pooled unless per_utterance_mr,
// which averages per-utterance rates instead.
AlignmentDiagnostics ComputeAlignmentDiagnostics(
    const std::vector<AlignedUtt>& candidates,
    const std::vector<AlignedUtt>& oracles, int blank_id,
    bool per_utterance_mr = false);

}  // namespace cassnat

#endif  // CASSNAT_EVAL_METRICS_H_
