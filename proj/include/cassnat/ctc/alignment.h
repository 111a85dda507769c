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

#ifndef CASSNAT_CTC_ALIGNMENT_H_
#define CASSNAT_CTC_ALIGNMENT_H_

#include <cstdint>
#include <vector>

#include "cassnat/ctc/vocab.h"

namespace cassnat {

// One frame-level token path. ids has one entry per frame and may contain
// blanks; its collapse never does.
struct Alignment {
  std::vector<int> ids;
  std::vector<double> frame_logprob;  // chosen log-prob per frame (optional)
  double logprob = 0.0;               // total path log-probability

  int num_frames() const { return static_cast<int>(ids.size()); }
};

// CTC collapse: drop repeated adjacent tokens, then drop blanks. Idempotent
// on blank-free outputs.
std::vector<int> Collapse(const std::vector<int>& ids, int blank_id);

// Token-synchronous attention mask derived from an alignment. Row u covers
// the frames (t_{u-1}, t_u] where t_u is the first frame of token u's run;
// the final row belongs to EOS and covers everything after t_{U'} (or just
// the last frame when nothing remains). Expansion widens every row by e
// frames on both sides, clamped to [0, T-1].
struct TriggerMask {
  int num_frames = 0;
  std::vector<uint8_t> rows;   // (U'+1) x T, row-major
  std::vector<int> boundaries; // first-occurrence frame t_u per token

  int num_rows() const {
    return num_frames == 0 ? 0
                           : static_cast<int>(rows.size()) / num_frames;
  }
  uint8_t at(int row, int frame) const {
    return rows[static_cast<size_t>(row) * num_frames + frame];
  }
};

// An all-blank alignment yields a mask with only the EOS row, covering every
// frame.
TriggerMask BuildTriggerMask(const std::vector<int>& alignment_ids,
                             int blank_id, int expansion);

}  // namespace cassnat

#endif  // CASSNAT_CTC_ALIGNMENT_H_
