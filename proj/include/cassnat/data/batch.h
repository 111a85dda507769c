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

#ifndef CASSNAT_DATA_BATCH_H_
#define CASSNAT_DATA_BATCH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "cassnat/data/corpus.h"
#include "cassnat/numcore/tensor.h"

namespace cassnat {

// Padded minibatch. Features are stored as one [B, Tmax, F] block (row-major)
// with a per-slot frame mask; targets stay ragged with explicit lengths.
struct Batch {
  std::vector<std::string> utt_ids;
  int batch_size = 0;
  int max_frames = 0;
  int feat_dim = 0;
  Tensor features;                   // shape {B, Tmax, F}
  std::vector<uint8_t> frame_mask;   // B x Tmax, 1 = real frame
  std::vector<std::vector<int>> targets;
  std::vector<int> frame_counts;

  // Copies utterance i back out as a [T_i, F] tensor.
  Tensor UtteranceFeatures(int i) const;
};

// Splits the utterances into padded batches. With sort_by_length, utterances
// are grouped by similar frame count (minimizing padding) and the batch order
// is shuffled per (seed, epoch); otherwise the utterance order itself is
// shuffled per (seed, epoch) before chunking.
std::vector<Batch> MakeBatches(const std::vector<Utterance>& utts, int size,
                               bool sort_by_length, uint64_t seed, int epoch);

// One utterance's features as a [T, F] tensor (no padding).
Tensor FeatureTensor(const Utterance& utt);

}  // namespace cassnat

#endif  // CASSNAT_DATA_BATCH_H_
