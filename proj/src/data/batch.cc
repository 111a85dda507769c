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

#include "cassnat/data/batch.h"

#include <algorithm>
#include <numeric>

#include "cassnat/util/common.h"
#include "cassnat/util/rng.h"

namespace cassnat {

namespace {

// Fisher-Yates with our deterministic Rng so epoch order is seed-stable.
void Shuffle(std::vector<int>* idx, Rng* rng) {
  for (int i = static_cast<int>(idx->size()) - 1; i > 0; --i) {
    std::swap((*idx)[i], (*idx)[rng->UniformInt(0, i)]);
  }
}

Batch BuildBatch(const std::vector<Utterance>& utts,
                 const std::vector<int>& members) {
  Batch b;
  b.batch_size = static_cast<int>(members.size());
  b.feat_dim = utts[members[0]].feat_dim;
  for (int i : members) {
    CheckContract(utts[i].feat_dim == b.feat_dim,
                  "MakeBatches: inconsistent feature dims");
    b.max_frames = std::max(b.max_frames, utts[i].num_frames);
  }
  b.features = Tensor::Zeros(Shape({b.batch_size, b.max_frames, b.feat_dim}));
  b.frame_mask.assign(static_cast<size_t>(b.batch_size) * b.max_frames, 0);
  for (int slot = 0; slot < b.batch_size; ++slot) {
    const Utterance& utt = utts[members[slot]];
    b.utt_ids.push_back(utt.utt_id);
    b.targets.push_back(utt.transcript);
    b.frame_counts.push_back(utt.num_frames);
    std::copy(utt.features.begin(), utt.features.end(),
              b.features.data().begin() +
                  static_cast<size_t>(slot) * b.max_frames * b.feat_dim);
    std::fill_n(b.frame_mask.begin() + static_cast<size_t>(slot) * b.max_frames,
                utt.num_frames, 1);
  }
  return b;
}

}  // namespace

Tensor Batch::UtteranceFeatures(int i) const {
  CheckContract(i >= 0 && i < batch_size, "Batch: utterance index out of range");
  const int t = frame_counts[i];
  std::vector<double> data(static_cast<size_t>(t) * feat_dim);
  std::copy_n(features.data().begin() +
                  static_cast<size_t>(i) * max_frames * feat_dim,
              data.size(), data.begin());
  return Tensor::FromData(Shape({t, feat_dim}), std::move(data));
}

std::vector<Batch> MakeBatches(const std::vector<Utterance>& utts, int size,
                               bool sort_by_length, uint64_t seed, int epoch) {
  CheckContract(size >= 1, "MakeBatches: batch size must be >= 1");
  std::vector<int> order(utts.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(Rng::Mix(seed, static_cast<uint64_t>(epoch)));

  std::vector<std::vector<int>> groups;
  if (sort_by_length) {
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return utts[a].num_frames < utts[b].num_frames;
    });
    for (size_t i = 0; i < order.size(); i += size) {
      groups.emplace_back(order.begin() + i,
                          order.begin() + std::min(i + size, order.size()));
    }
    std::vector<int> group_order(groups.size());
    std::iota(group_order.begin(), group_order.end(), 0);
    Shuffle(&group_order, &rng);
    std::vector<std::vector<int>> shuffled;
    shuffled.reserve(groups.size());
    for (int g : group_order) shuffled.push_back(std::move(groups[g]));
    groups = std::move(shuffled);
  } else {
    Shuffle(&order, &rng);
    for (size_t i = 0; i < order.size(); i += size) {
      groups.emplace_back(order.begin() + i,
                          order.begin() + std::min(i + size, order.size()));
    }
  }

  std::vector<Batch> batches;
  batches.reserve(groups.size());
  for (const std::vector<int>& members : groups) {
    batches.push_back(BuildBatch(utts, members));
  }
  return batches;
}

Tensor FeatureTensor(const Utterance& utt) {
  CheckContract(utt.features.size() ==
                    static_cast<size_t>(utt.num_frames) * utt.feat_dim,
                "FeatureTensor: feature buffer disagrees with dimensions");
  return Tensor::FromData({utt.num_frames, utt.feat_dim}, utt.features);
}

}  // namespace cassnat
