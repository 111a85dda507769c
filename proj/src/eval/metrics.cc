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

#include "cassnat/eval/metrics.h"

#include <algorithm>
#include <unordered_map>

#include "cassnat/ctc/alignment.h"
#include "cassnat/util/common.h"

namespace cassnat {

EditCounts EditDistance(const std::vector<int>& ref,
                        const std::vector<int>& hyp) {
  const int r = static_cast<int>(ref.size());
  const int h = static_cast<int>(hyp.size());
  struct Cell {
    int cost = 0;
    EditCounts counts;
  };
  std::vector<Cell> dp(static_cast<size_t>(r + 1) * (h + 1));
  auto at = [&](int i, int j) -> Cell& {
    return dp[static_cast<size_t>(i) * (h + 1) + j];
  };
  for (int j = 1; j <= h; ++j) {
    at(0, j).cost = j;
    at(0, j).counts.ins = j;
  }
  for (int i = 1; i <= r; ++i) {
    at(i, 0).cost = i;
    at(i, 0).counts.del = i;
  }
  for (int i = 1; i <= r; ++i) {
    for (int j = 1; j <= h; ++j) {
      const bool match = ref[i - 1] == hyp[j - 1];
      const int diag = at(i - 1, j - 1).cost + (match ? 0 : 1);
      const int up = at(i - 1, j).cost + 1;    // deletion
      const int left = at(i, j - 1).cost + 1;  // insertion
      const int best = std::min({diag, up, left});
      Cell& cell = at(i, j);
      cell.cost = best;
      // Tie order: substitution/match, then deletion, then insertion.
      if (diag == best) {
        cell.counts = at(i - 1, j - 1).counts;
        if (!match) ++cell.counts.sub;
      } else if (up == best) {
        cell.counts = at(i - 1, j).counts;
        ++cell.counts.del;
      } else {
        cell.counts = at(i, j - 1).counts;
        ++cell.counts.ins;
      }
    }
  }
  return at(r, h).counts;
}

double Wer(const std::vector<int>& ref, const std::vector<int>& hyp) {
  return static_cast<double>(EditDistance(ref, hyp).total()) /
         std::max<size_t>(ref.size(), 1);
}

void CorpusWer::Add(const std::vector<int>& ref, const std::vector<int>& hyp) {
  const EditCounts c = EditDistance(ref, hyp);
  counts.sub += c.sub;
  counts.del += c.del;
  counts.ins += c.ins;
  ref_tokens += static_cast<int64_t>(std::max<size_t>(ref.size(), 1));
  ++num_utterances;
}

double CorpusWer::rate() const {
  return ref_tokens == 0 ? 0.0
                         : static_cast<double>(counts.total()) / ref_tokens;
}

double MismatchRate(const std::vector<int>& candidate_align,
                    const std::vector<int>& oracle_align, int blank_id) {
  const std::vector<int> cand = Collapse(candidate_align, blank_id);
  const std::vector<int> oracle = Collapse(oracle_align, blank_id);
  const EditCounts c = EditDistance(oracle, cand);
  return static_cast<double>(c.del + c.ins) / std::max<size_t>(oracle.size(), 1);
}

double BucketStat::wer() const {
  return ref_tokens == 0 ? 0.0
                         : static_cast<double>(edits.total()) / ref_tokens;
}

AlignmentDiagnostics ComputeAlignmentDiagnostics(
    const std::vector<AlignedUtt>& candidates,
    const std::vector<AlignedUtt>& oracles, int blank_id,
    bool per_utterance_mr) {
  CheckContract(candidates.size() == oracles.size(),
                "ComputeAlignmentDiagnostics: split sizes differ");
  std::unordered_map<std::string, const AlignedUtt*> by_id;
  for (const AlignedUtt& o : oracles) {
    CheckContract(by_id.emplace(o.utt_id, &o).second,
                  "ComputeAlignmentDiagnostics: duplicate oracle id " + o.utt_id);
  }

  AlignmentDiagnostics diag;
  diag.num_utterances = static_cast<int>(candidates.size());
  int length_errors = 0;
  int64_t mr_num = 0, mr_den = 0;
  double mr_mean = 0.0;
  for (const AlignedUtt& cand : candidates) {
    auto it = by_id.find(cand.utt_id);
    CheckContract(it != by_id.end(),
                  "ComputeAlignmentDiagnostics: unpaired id " + cand.utt_id);
    const AlignedUtt& oracle = *it->second;

    const std::vector<int> cc = Collapse(cand.align, blank_id);
    const std::vector<int> oc = Collapse(oracle.align, blank_id);
    if (cc.size() != oc.size()) ++length_errors;

    const EditCounts ec = EditDistance(oc, cc);
    mr_num += ec.del + ec.ins;
    mr_den += static_cast<int64_t>(oc.size());
    mr_mean += static_cast<double>(ec.del + ec.ins) / std::max<size_t>(oc.size(), 1);

    const int key = static_cast<int>(cc.size()) - static_cast<int>(oc.size());
    BucketStat& bucket = diag.length_error_hist[key];
    ++bucket.count;
    const EditCounts we = EditDistance(cand.ref, cand.hyp);
    bucket.edits.sub += we.sub;
    bucket.edits.del += we.del;
    bucket.edits.ins += we.ins;
    bucket.ref_tokens += static_cast<int64_t>(std::max<size_t>(cand.ref.size(), 1));
  }
  if (!candidates.empty()) {
    diag.lper = static_cast<double>(length_errors) / candidates.size();
    diag.mr = per_utterance_mr
                  ? mr_mean / candidates.size()
                  : static_cast<double>(mr_num) / std::max<int64_t>(mr_den, 1);
  }
  return diag;
}

}  // namespace cassnat
