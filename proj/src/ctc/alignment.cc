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

#include "cassnat/ctc/alignment.h"

#include <algorithm>

namespace cassnat {

std::vector<int> Collapse(const std::vector<int>& ids, int blank_id) {
  std::vector<int> out;
  int prev = -1;
  for (int id : ids) {
    if (id != prev && id != blank_id) out.push_back(id);
    prev = id;
  }
  return out;
}

TriggerMask BuildTriggerMask(const std::vector<int>& alignment_ids,
                             int blank_id, int expansion) {
  const int t_frames = static_cast<int>(alignment_ids.size());
  CheckContract(t_frames >= 1, "trigger mask: empty alignment");
  CheckContract(expansion >= 0, "trigger mask: negative expansion");

  TriggerMask mask;
  mask.num_frames = t_frames;
  // t_u = first frame of token u's run (a repeat continues the run; a repeat
  // separated by blank starts a new token).
  int prev = -1;
  for (int t = 0; t < t_frames; ++t) {
    int id = alignment_ids[t];
    if (id != blank_id && id != prev) mask.boundaries.push_back(t);
    prev = id;
  }
  const int num_tokens = static_cast<int>(mask.boundaries.size());
  mask.rows.assign(static_cast<size_t>(num_tokens + 1) * t_frames, 0);

  auto fill = [&](int row, int lo, int hi) {
    lo = std::max(0, lo - expansion);
    hi = std::min(t_frames - 1, hi + expansion);
    for (int t = lo; t <= hi; ++t) {
      mask.rows[static_cast<size_t>(row) * t_frames + t] = 1;
    }
  };

  int prev_boundary = -1;
  for (int u = 0; u < num_tokens; ++u) {
    fill(u, prev_boundary + 1, mask.boundaries[u]);
    prev_boundary = mask.boundaries[u];
  }
  // EOS row: all frames past the last boundary, or the final frame alone
  // when the last token already ends the utterance.
  if (prev_boundary + 1 <= t_frames - 1) {
    fill(num_tokens, prev_boundary + 1, t_frames - 1);
  } else {
    fill(num_tokens, t_frames - 1, t_frames - 1);
  }
  return mask;
}

}  // namespace cassnat
