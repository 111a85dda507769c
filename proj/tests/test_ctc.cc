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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "cassnat/ctc/ctc.h"
#include "cassnat/numcore/grad_check.h"
#include "oracles.h"

using namespace cassnat;

namespace {

Tensor RandomLogits(int t, int v, Rng* rng, double scale = 1.5) {
  std::vector<double> data(static_cast<size_t>(t) * v);
  for (auto& x : data) x = scale * rng->Normal();
  return Tensor::FromData({t, v}, std::move(data));
}

Tensor GridFromProbs(const std::vector<std::vector<double>>& rows) {
  const int t = static_cast<int>(rows.size());
  const int v = static_cast<int>(rows[0].size());
  std::vector<double> data;
  for (const auto& row : rows) {
    double sum = 0.0;
    for (double p : row) sum += p;
    REQUIRE(std::abs(sum - 1.0) < 1e-12);
    for (double p : row) data.push_back(std::log(p));
  }
  return Tensor::FromData({t, v}, std::move(data));
}

std::vector<int> RandomTarget(int max_len, const Vocabulary& vocab,
                              Rng* rng) {
  int len = rng->UniformInt(0, max_len);
  std::vector<int> target;
  for (int i = 0; i < len; ++i) {
    int id = rng->UniformInt(0, vocab.size() - 2);
    target.push_back(id >= vocab.blank_id ? id + 1 : id);  // skip blank only
  }
  return target;
}

// Posterior grid shaped like the BPA/ESA walkthrough figure: tokens C, A, T
// mapped onto ids 2, 3, 4 of a 3-letter vocabulary.
constexpr int kC = 2, kA = 3, kT = 4;
Tensor WalkthroughGrid() {
  return GridFromProbs({
      {0.06, 0.01, 0.90, 0.02, 0.01},  // C 0.90
      {0.60, 0.02, 0.25, 0.10, 0.03},  // _ 0.60
      {0.54, 0.01, 0.03, 0.40, 0.02},  // _ 0.54
      {0.05, 0.01, 0.02, 0.90, 0.02},  // A 0.90
      {0.60, 0.01, 0.02, 0.30, 0.07},  // _ 0.60
      {0.51, 0.01, 0.01, 0.03, 0.44},  // _ 0.51
      {0.28, 0.01, 0.01, 0.03, 0.67},  // T 0.67
      {0.41, 0.01, 0.01, 0.02, 0.55},  // T 0.55
      {0.89, 0.01, 0.01, 0.02, 0.07},  // _ 0.89
  });
}

// Same shape but with the confident frames pushed above 0.9, so that with
// tau = 0.9 sampling happens at frames 2, 4, 5, 6 (0-based) and nowhere else.
Tensor SamplingGrid() {
  return GridFromProbs({
      {0.030, 0.005, 0.950, 0.010, 0.005},  // C 0.95  (confident)
      {0.920, 0.005, 0.050, 0.020, 0.005},  // _ 0.92  (confident)
      {0.540, 0.010, 0.030, 0.400, 0.020},  // _ 0.54  vs A
      {0.030, 0.005, 0.010, 0.950, 0.005},  // A 0.95  (confident)
      {0.600, 0.010, 0.020, 0.300, 0.070},  // _ 0.60  vs A
      {0.510, 0.010, 0.010, 0.030, 0.440},  // _ 0.51  vs T
      {0.280, 0.010, 0.010, 0.030, 0.670},  // T 0.67  vs _
      {0.930, 0.005, 0.005, 0.010, 0.050},  // hold: _ 0.93 (confident)
      {0.950, 0.005, 0.005, 0.010, 0.030},  // _ 0.95  (confident)
  });
}

}  // namespace

TEST_CASE("collapse: repeats then blanks") {
  const int b = 0;
  CHECK(Collapse({b, kC, kC, b, kA, b, b, kT, b}, b) ==
        std::vector<int>{kC, kA, kT});
  CHECK(Collapse({b, b, b}, b) == std::vector<int>{});
  CHECK(Collapse({2, b, 2}, b) == std::vector<int>{2, 2});
  CHECK(Collapse({2, 2, 2}, b) == std::vector<int>{2});
  // Idempotent whenever the output has no adjacent duplicates (a repeat that
  // survives collapse, as in (2,b,2) -> (2,2), collapses further by design).
  auto once = Collapse({b, 3, 3, b, 2, 2, b, b, 4}, b);
  CHECK(Collapse(once, b) == once);
}

TEST_CASE("feasibility: length against target plus forced blanks") {
  CHECK(CtcFeasible(1, {2}));
  CHECK(CtcFeasible(3, {2, 2}));
  CHECK_FALSE(CtcFeasible(2, {2, 2}));
  CHECK_FALSE(CtcFeasible(1, {2, 3}));
  CHECK(CtcFeasible(0, {}));
  CHECK(CtcFeasible(5, {2, 2, 2}));  // 3 tokens + 2 separators
  CHECK_FALSE(CtcFeasible(4, {2, 2, 2}));
}

TEST_CASE("ctc_logprob: single-frame single-token uniform grid") {
  Vocabulary vocab = Vocabulary::Chars(1);  // blank, eos, a
  Tensor logits = Tensor::Zeros({1, 3});
  auto lp = CtcLogProb(logits, {2}, vocab);
  REQUIRE(lp.has_value());
  CHECK(lp->item() == doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("ctc_logprob: two frames one token sums the three paths") {
  Vocabulary vocab = Vocabulary::Chars(1);
  Rng rng(11);
  Tensor logits = RandomLogits(2, 3, &rng);
  auto lp = CtcLogProb(logits, {2}, vocab);
  REQUIRE(lp.has_value());
  // p1(a)p2(a) + p1(a)p2(b) + p1(b)p2(a), b = blank.
  Tensor sm = ops::Softmax(logits);
  double expect = sm.at2(0, 2) * sm.at2(1, 2) + sm.at2(0, 2) * sm.at2(1, 0) +
                  sm.at2(0, 0) * sm.at2(1, 2);
  CHECK(lp->item() == doctest::Approx(std::log(expect)).epsilon(1e-12));
}

TEST_CASE("ctc_logprob: empty target is the all-blank path") {
  Vocabulary vocab = Vocabulary::Chars(2);
  Rng rng(3);
  Tensor logits = RandomLogits(4, 4, &rng);
  auto lp = CtcLogProb(logits, {}, vocab);
  REQUIRE(lp.has_value());
  Tensor sm = ops::Softmax(logits);
  double expect = 0.0;
  for (int t = 0; t < 4; ++t) expect += std::log(sm.at2(t, 0));
  CHECK(lp->item() == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("ctc_logprob: contract violations and infeasibility") {
  Vocabulary vocab = Vocabulary::Chars(2);
  Rng rng(4);
  Tensor logits = RandomLogits(3, 4, &rng);
  CHECK_THROWS_AS(CtcLogProb(logits, {0}, vocab), ContractError);
  CHECK_THROWS_AS(CtcLogProb(logits, {9}, vocab), ContractError);
  // A repeated token needs a separating blank: [2,2] fits in 3 frames but
  // not in 2.
  Tensor short_logits = RandomLogits(2, 4, &rng);
  CHECK_FALSE(CtcLogProb(short_logits, {2, 2}, vocab).has_value());
  CHECK(CtcLogProb(logits, {2, 2}, vocab).has_value());
}

TEST_CASE("ctc_logprob: 200 random grids match exhaustive path enumeration") {
  Rng rng(2025);
  int checked = 0;
  while (checked < 200) {
    int v = rng.UniformInt(3, 4);
    int t = rng.UniformInt(1, 6);
    Vocabulary vocab = Vocabulary::Chars(v - 2);
    Tensor logits = RandomLogits(t, v, &rng);
    std::vector<int> target = RandomTarget(3, vocab, &rng);
    auto mine = CtcLogProb(logits, target, vocab);
    auto brute = testing::EnumerateCtcPaths(logits, target, vocab);
    if (!CtcFeasible(t, target)) {
      CHECK_FALSE(mine.has_value());
      CHECK(brute.num_paths == 0);
      continue;
    }
    REQUIRE(mine.has_value());
    CHECK(std::abs(mine->item() - brute.log_sum) < 1e-8);
    ++checked;
  }
}

TEST_CASE("ctc_logprob: total probability over all targets is one") {
  // Every length-T path collapses to exactly one target, so the exp-sums
  // over all blank-free sequences must form a partition of unity.
  Vocabulary vocab = Vocabulary::Chars(1);  // V = 3
  Rng rng(77);
  for (int t = 1; t <= 4; ++t) {
    Tensor logits = RandomLogits(t, 3, &rng);
    double total = 0.0;
    for (const auto& target : testing::AllTargets(vocab, t)) {
      auto lp = CtcLogProb(logits, target, vocab);
      if (lp.has_value()) total += std::exp(lp->item());
    }
    CHECK(std::abs(total - 1.0) < 1e-8);
  }
}

TEST_CASE("viterbi: one-hot grid recovers the planted path") {
  Vocabulary vocab = Vocabulary::Chars(2);
  std::vector<int> path = {2, 0, 3, 3, 0};
  std::vector<double> data(5 * 4, std::log(0.01));
  for (int t = 0; t < 5; ++t) {
    data[static_cast<size_t>(t) * 4 + path[t]] = std::log(0.97);
  }
  Tensor logits = Tensor::FromData({5, 4}, std::move(data));
  auto a = ViterbiAlign(logits, {2, 3}, vocab);
  REQUIRE(a.has_value());
  CHECK(a->ids == path);
  CHECK(Collapse(a->ids, vocab.blank_id) == std::vector<int>{2, 3});
}

TEST_CASE("viterbi: repeated token forces a separating blank") {
  Vocabulary vocab = Vocabulary::Chars(1);
  Rng rng(8);
  Tensor logits = RandomLogits(3, 3, &rng);
  auto a = ViterbiAlign(logits, {2, 2}, vocab);
  REQUIRE(a.has_value());
  CHECK(a->ids == std::vector<int>{2, 0, 2});
}

TEST_CASE("viterbi: matches enumeration max and collapses to the target") {
  Rng rng(31337);
  int checked = 0;
  while (checked < 150) {
    int v = rng.UniformInt(3, 4);
    int t = rng.UniformInt(1, 6);
    Vocabulary vocab = Vocabulary::Chars(v - 2);
    Tensor logits = RandomLogits(t, v, &rng);
    std::vector<int> target = RandomTarget(3, vocab, &rng);
    auto mine = ViterbiAlign(logits, target, vocab);
    if (!CtcFeasible(t, target)) {
      CHECK_FALSE(mine.has_value());
      continue;
    }
    auto brute = testing::EnumerateCtcPaths(logits, target, vocab);
    REQUIRE(mine.has_value());
    CHECK(std::abs(mine->logprob - brute.log_max) < 1e-10);
    CHECK(Collapse(mine->ids, vocab.blank_id) == target);
    // Max over paths can never beat the sum over paths.
    auto total = CtcLogProb(logits, target, vocab);
    CHECK(mine->logprob <= total->item() + 1e-12);
    ++checked;
  }
}

TEST_CASE("best_path: walkthrough grid, per-frame argmax and collapse") {
  Alignment bpa = BestPathAlign(WalkthroughGrid());
  CHECK(bpa.ids == std::vector<int>{kC, 0, 0, kA, 0, 0, kT, kT, 0});
  CHECK(Collapse(bpa.ids, 0) == std::vector<int>{kC, kA, kT});
}

TEST_CASE("best_path: uniform rows tie-break to the lowest index") {
  Tensor logits = Tensor::Zeros({3, 4});
  Alignment bpa = BestPathAlign(logits);
  CHECK(bpa.ids == std::vector<int>{0, 0, 0});
}

TEST_CASE("beam_search: width 1 degenerates to collapsed best path") {
  Rng rng(99);
  Vocabulary vocab = Vocabulary::Chars(3);
  for (int i = 0; i < 50; ++i) {
    Tensor logits = RandomLogits(rng.UniformInt(1, 8), 5, &rng);
    Alignment bsa = BeamSearchAlign(logits, 1, vocab);
    Alignment bpa = BestPathAlign(logits);
    CHECK(Collapse(bsa.ids, vocab.blank_id) ==
          Collapse(bpa.ids, vocab.blank_id));
  }
}

TEST_CASE("beam_search: walkthrough grid with width 4 beats or ties BPA") {
  Vocabulary vocab = Vocabulary::Chars(3);
  Tensor logits = WalkthroughGrid();
  Alignment bsa = BeamSearchAlign(logits, 4, vocab);
  std::vector<int> bsa_y = Collapse(bsa.ids, vocab.blank_id);
  std::vector<int> bpa_y = Collapse(BestPathAlign(logits).ids, vocab.blank_id);
  auto p_bsa = CtcLogProb(logits, bsa_y, vocab);
  auto p_bpa = CtcLogProb(logits, bpa_y, vocab);
  REQUIRE(p_bsa.has_value());
  REQUIRE(p_bpa.has_value());
  CHECK(p_bsa->item() >= p_bpa->item() - 1e-12);
  CHECK(Collapse(bsa.ids, vocab.blank_id) == bsa_y);  // alignment is forced
}

TEST_CASE("beam_search: one-hot grid matches BPA collapse") {
  Vocabulary vocab = Vocabulary::Chars(2);
  std::vector<double> data(4 * 4, std::log(0.02));
  std::vector<int> path = {2, 2, 0, 3};
  for (int t = 0; t < 4; ++t) {
    data[static_cast<size_t>(t) * 4 + path[t]] = std::log(0.94);
  }
  Tensor logits = Tensor::FromData({4, 4}, std::move(data));
  Alignment bsa = BeamSearchAlign(logits, 4, vocab);
  CHECK(Collapse(bsa.ids, vocab.blank_id) ==
        Collapse(BestPathAlign(logits).ids, vocab.blank_id));
}

TEST_CASE("esa: tau below every top-1 probability reproduces BPA") {
  Rng rng(12);
  Tensor logits = RandomLogits(6, 5, &rng);
  Alignment bpa = BestPathAlign(logits);
  EsaConfig cfg;
  cfg.tau = 0.01;  // top-1 of a 5-way softmax is always above 1/5
  cfg.num_samples = 20;
  cfg.seed = 5;
  for (const Alignment& a : EsaSample(logits, cfg)) {
    CHECK(a.ids == bpa.ids);
  }
}

TEST_CASE("esa: a 0.6-confidence frame is sampled at rate one half") {
  Tensor logits = GridFromProbs({{0.6, 0.3, 0.1}});
  EsaConfig cfg;
  cfg.tau = 0.9;
  cfg.num_samples = 1000;
  cfg.seed = 17;
  int top1 = 0;
  for (const Alignment& a : EsaSample(logits, cfg)) {
    CHECK((a.ids[0] == 0 || a.ids[0] == 1));
    if (a.ids[0] == 0) ++top1;
  }
  double rate = top1 / 1000.0;
  CHECK(rate >= 0.45);
  CHECK(rate <= 0.55);
}

TEST_CASE("esa: deviations from BPA appear only at low-confidence frames") {
  Rng rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    Tensor logits = RandomLogits(7, 4, &rng);
    Tensor sm = ops::Softmax(logits);
    Alignment bpa = BestPathAlign(logits);
    EsaConfig cfg;
    cfg.tau = 0.5;
    cfg.num_samples = 10;
    cfg.seed = static_cast<uint64_t>(rep);
    for (const Alignment& a : EsaSample(logits, cfg)) {
      for (int t = 0; t < 7; ++t) {
        if (sm.at2(t, bpa.ids[t]) > cfg.tau) CHECK(a.ids[t] == bpa.ids[t]);
      }
    }
  }
}

TEST_CASE("esa: sampling grid flips exactly the four shaky frames") {
  Tensor logits = SamplingGrid();
  Alignment bpa = BestPathAlign(logits);
  CHECK(bpa.ids == std::vector<int>{kC, 0, 0, kA, 0, 0, kT, 0, 0});
  EsaConfig cfg;
  cfg.tau = 0.9;
  cfg.num_samples = 500;
  cfg.seed = 3;
  const std::set<int> shaky = {2, 4, 5, 6};
  std::map<int, std::set<int>> seen;  // frame -> observed token ids
  std::set<std::vector<int>> distinct;
  for (const Alignment& a : EsaSample(logits, cfg)) {
    distinct.insert(a.ids);
    for (int t = 0; t < 9; ++t) {
      if (!shaky.count(t)) {
        CHECK(a.ids[t] == bpa.ids[t]);
      } else {
        seen[t].insert(a.ids[t]);
      }
    }
  }
  // Every shaky frame exercises both of its top-2 choices, and all 2^4
  // combinations occur (any figure-style sampled alignment is producible).
  for (int t : shaky) CHECK(seen[t].size() == 2);
  CHECK(distinct.size() == 16);
  CHECK(seen[2] == std::set<int>{0, kA});
  CHECK(seen[4] == std::set<int>{0, kA});
  CHECK(seen[5] == std::set<int>{0, kT});
  CHECK(seen[6] == std::set<int>{0, kT});
}

TEST_CASE("esa: deterministic under a fixed seed") {
  Rng rng(55);
  Tensor logits = RandomLogits(8, 4, &rng);
  EsaConfig cfg;
  cfg.tau = 0.95;
  cfg.num_samples = 5;
  cfg.seed = 42;
  auto a = EsaSample(logits, cfg);
  auto b = EsaSample(logits, cfg);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].ids == b[i].ids);
}

TEST_CASE("trigger_mask: worked example rows and expansion") {
  std::vector<int> z = {0, kC, kC, 0, kA, 0, 0, kT, 0};
  TriggerMask m = BuildTriggerMask(z, 0, 0);
  CHECK(m.boundaries == std::vector<int>{1, 4, 7});
  CHECK(m.num_rows() == 4);
  std::vector<uint8_t> row_a(m.rows.begin() + 9, m.rows.begin() + 18);
  CHECK(row_a == std::vector<uint8_t>{0, 0, 1, 1, 1, 0, 0, 0, 0});

  TriggerMask e1 = BuildTriggerMask(z, 0, 1);
  std::vector<uint8_t> row_a1(e1.rows.begin() + 9, e1.rows.begin() + 18);
  CHECK(row_a1 == std::vector<uint8_t>{0, 1, 1, 1, 1, 1, 0, 0, 0});
}

TEST_CASE("trigger_mask: single token and EOS coverage") {
  TriggerMask m = BuildTriggerMask({2, 0, 0}, 0, 0);
  REQUIRE(m.num_rows() == 2);
  CHECK(std::vector<uint8_t>(m.rows.begin(), m.rows.begin() + 3) ==
        std::vector<uint8_t>{1, 0, 0});
  CHECK(std::vector<uint8_t>(m.rows.begin() + 3, m.rows.begin() + 6) ==
        std::vector<uint8_t>{0, 1, 1});
}

TEST_CASE("trigger_mask: all-blank alignment leaves only the EOS row") {
  TriggerMask m = BuildTriggerMask({0, 0, 0, 0}, 0, 0);
  REQUIRE(m.num_rows() == 1);
  CHECK(m.boundaries.empty());
  CHECK(m.rows == std::vector<uint8_t>{1, 1, 1, 1});
}

TEST_CASE("trigger_mask: EOS falls back to the last frame when none remain") {
  TriggerMask m = BuildTriggerMask({0, 0, 2}, 0, 0);
  REQUIRE(m.num_rows() == 2);
  CHECK(std::vector<uint8_t>(m.rows.begin(), m.rows.begin() + 3) ==
        std::vector<uint8_t>{1, 1, 1});
  CHECK(std::vector<uint8_t>(m.rows.begin() + 3, m.rows.begin() + 6) ==
        std::vector<uint8_t>{0, 0, 1});
}

TEST_CASE("trigger_mask: unexpanded rows partition the frames") {
  Rng rng(2023);
  int done = 0;
  while (done < 1000) {
    int t = rng.UniformInt(2, 12);
    std::vector<int> ids(t);
    for (int i = 0; i < t; ++i) {
      int draw = rng.UniformInt(0, 4);
      ids[i] = draw <= 1 ? 0 : draw;  // blank-heavy
    }
    TriggerMask m = BuildTriggerMask(ids, 0, 0);
    // Skip the EOS-fallback corner (last token starting on the final frame);
    // it deliberately overlaps and is covered by its own test above.
    if (!m.boundaries.empty() && m.boundaries.back() == t - 1) continue;
    for (size_t i = 1; i < m.boundaries.size(); ++i) {
      CHECK(m.boundaries[i] > m.boundaries[i - 1]);
    }
    CHECK(m.num_rows() ==
          static_cast<int>(Collapse(ids, 0).size()) + 1);
    for (int frame = 0; frame < t; ++frame) {
      int cover = 0;
      for (int r = 0; r < m.num_rows(); ++r) cover += m.at(r, frame);
      CHECK(cover == 1);
    }
    // Rows are contiguous and nonempty.
    for (int r = 0; r < m.num_rows(); ++r) {
      int first = -1, last = -1, count = 0;
      for (int frame = 0; frame < t; ++frame) {
        if (m.at(r, frame)) {
          if (first < 0) first = frame;
          last = frame;
          ++count;
        }
      }
      REQUIRE(count > 0);
      CHECK(count == last - first + 1);
    }
    ++done;
  }
}

TEST_CASE("ctc_grad: oracle rows sum to zero and match finite differences") {
  Vocabulary vocab = Vocabulary::Chars(2);
  Rng rng(404);
  Tensor logits = RandomLogits(5, 4, &rng);
  std::vector<int> target = {2, 3};
  auto oracle = CtcGradOracle(logits, target, vocab);
  REQUIRE(oracle.has_value());
  for (int t = 0; t < 5; ++t) {
    double row = 0.0;
    for (int j = 0; j < 4; ++j) row += oracle->grad[static_cast<size_t>(t) * 4 + j];
    CHECK(std::abs(row) < 1e-12);
  }
  const double h = 1e-5;
  for (size_t i = 0; i < logits.data().size(); ++i) {
    double saved = logits.data()[i];
    logits.data()[i] = saved + h;
    double up = -CtcLogProb(logits, target, vocab)->item();
    logits.data()[i] = saved - h;
    double down = -CtcLogProb(logits, target, vocab)->item();
    logits.data()[i] = saved;
    double numeric = (up - down) / (2 * h);
    CHECK(std::abs(oracle->grad[i] - numeric) /
              std::max(1.0, std::abs(numeric)) <
          1e-4);
  }
}

TEST_CASE("ctc_grad: oracle and autodiff agree to full precision") {
  Rng rng(606);
  for (int rep = 0; rep < 25; ++rep) {
    int v = rng.UniformInt(3, 5);
    int t = rng.UniformInt(1, 7);
    Vocabulary vocab = Vocabulary::Chars(v - 2);
    std::vector<int> target = RandomTarget(3, vocab, &rng);
    if (!CtcFeasible(t, target)) continue;
    std::vector<double> data(static_cast<size_t>(t) * v);
    for (auto& x : data) x = 1.5 * rng.Normal();
    Tensor logits = Tensor::FromData({t, v}, std::move(data), true);
    auto lp = CtcLogProb(logits, target, vocab);
    REQUIRE(lp.has_value());
    Backward(ops::Scale(*lp, -1.0));
    auto oracle = CtcGradOracle(logits, target, vocab);
    REQUIRE(oracle.has_value());
    CHECK(std::abs(lp->item() - oracle->logprob) < 1e-10);
    for (size_t i = 0; i < oracle->grad.size(); ++i) {
      CHECK(std::abs(logits.grad()[i] - oracle->grad[i]) < 1e-10);
    }
  }
}

TEST_CASE("ctc_grad: empty target gradient is softmax minus blank one-hot") {
  Vocabulary vocab = Vocabulary::Chars(1);
  Rng rng(7);
  std::vector<double> data(6);
  for (auto& x : data) x = rng.Normal();
  Tensor logits = Tensor::FromData({2, 3}, std::move(data), true);
  auto lp = CtcLogProb(logits, {}, vocab);
  REQUIRE(lp.has_value());
  Backward(ops::Scale(*lp, -1.0));
  auto oracle = CtcGradOracle(logits, {}, vocab);
  REQUIRE(oracle.has_value());
  for (size_t i = 0; i < oracle->grad.size(); ++i) {
    CHECK(std::abs(logits.grad()[i] - oracle->grad[i]) < 1e-12);
  }
  CHECK_FALSE(CtcGradOracle(Tensor::Zeros({1, 3}), {2, 2}, vocab).has_value());
}

TEST_CASE("alignment_logprob: sums the chosen per-frame log-probabilities") {
  Rng rng(1);
  Tensor logits = RandomLogits(4, 3, &rng);
  Alignment bpa = BestPathAlign(logits);
  CHECK(AlignmentLogProb(logits, bpa.ids) ==
        doctest::Approx(bpa.logprob).epsilon(1e-12));
}
