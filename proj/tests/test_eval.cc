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
#include <vector>

#include "cassnat/eval/metrics.h"
#include "cassnat/util/common.h"
#include "cassnat/util/rng.h"

using namespace cassnat;

namespace {

// Exhaustive minimum edit cost over every edit script; tractable for the
// short sequences used here.
int BruteEditCost(const std::vector<int>& a, size_t i, const std::vector<int>& b,
                  size_t j) {
  if (i == a.size()) return static_cast<int>(b.size() - j);
  if (j == b.size()) return static_cast<int>(a.size() - i);
  int best = BruteEditCost(a, i + 1, b, j + 1) + (a[i] != b[j] ? 1 : 0);
  best = std::min(best, BruteEditCost(a, i + 1, b, j) + 1);
  best = std::min(best, BruteEditCost(a, i, b, j + 1) + 1);
  return best;
}

std::vector<int> RandomSeq(Rng* rng, int max_len, int alphabet) {
  std::vector<int> s(rng->UniformInt(0, max_len));
  for (int& v : s) v = rng->UniformInt(2, 1 + alphabet);
  return s;
}

}  // namespace

TEST_CASE("wer: hand-checkable cases") {
  const std::vector<int> cat = {3, 2, 5};  // C, A, T
  CHECK(Wer(cat, cat) == 0.0);
  CHECK(EditDistance(cat, cat).total() == 0);

  // ref=(C,A,T), hyp=(C,T): one deletion.
  EditCounts c = EditDistance(cat, {3, 5});
  CHECK(c.del == 1);
  CHECK(c.sub == 0);
  CHECK(c.ins == 0);
  CHECK(Wer(cat, {3, 5}) == doctest::Approx(1.0 / 3.0));

  // Empty reference uses denominator 1.
  CHECK(Wer({}, {3, 5}) == doctest::Approx(2.0));
  CHECK(Wer({}, {}) == 0.0);

  // All-different same-length pair resolves to pure substitutions.
  EditCounts s = EditDistance({2, 3, 4}, {5, 6, 7});
  CHECK(s.sub == 3);
  CHECK(s.del == 0);
  CHECK(s.ins == 0);
}

TEST_CASE("wer: ties resolve toward substitution deterministically") {
  // (C,A,T) vs (C,T,X): del+sub and sub+sub both cost 2; the substitution
  // preference picks the all-substitution script.
  EditCounts c = EditDistance({3, 2, 5}, {3, 5, 9});
  CHECK(c.total() == 2);
  CHECK(c.sub == 2);
  CHECK(c.del == 0);
  CHECK(c.ins == 0);
}

TEST_CASE("wer: matches the exhaustive edit-script oracle") {
  Rng rng(404);
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<int> ref = RandomSeq(&rng, 6, 3);
    std::vector<int> hyp = RandomSeq(&rng, 6, 3);
    const EditCounts c = EditDistance(ref, hyp);
    CHECK(c.total() == BruteEditCost(ref, 0, hyp, 0));
    // Script consistency: matched positions line up on both sides.
    const int matches_ref = static_cast<int>(ref.size()) - c.sub - c.del;
    const int matches_hyp = static_cast<int>(hyp.size()) - c.sub - c.ins;
    CHECK(matches_ref == matches_hyp);
    CHECK(matches_ref >= 0);
  }
}

TEST_CASE("wer: invariants") {
  Rng rng(405);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> ref = RandomSeq(&rng, 8, 4);
    std::vector<int> hyp = RandomSeq(&rng, 8, 4);
    // Relabeling symmetry: a bijection on token ids changes nothing.
    auto relabel = [](std::vector<int> v) {
      for (int& x : v) x = 100 - x;
      return v;
    };
    EditCounts a = EditDistance(ref, hyp);
    EditCounts b = EditDistance(relabel(ref), relabel(hyp));
    CHECK(a.sub == b.sub);
    CHECK(a.del == b.del);
    CHECK(a.ins == b.ins);
    // Triangle-style bound.
    CHECK(Wer(ref, hyp) <=
          static_cast<double>(ref.size() + hyp.size()) /
              std::max<size_t>(ref.size(), 1));
  }
}

TEST_CASE("corpus wer: pools counts over utterances") {
  CorpusWer cw;
  cw.Add({3, 2, 5}, {3, 2, 5});  // 0 errors / 3
  cw.Add({3, 2, 5}, {3, 5});     // 1 del / 3
  CHECK(cw.num_utterances == 2);
  CHECK(cw.ref_tokens == 6);
  CHECK(cw.rate() == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("mr: substitutions are excluded, deletions and insertions count") {
  // Identical collapses.
  CHECK(MismatchRate({3, 3, 0, 2}, {0, 3, 2, 2}, 0) == 0.0);
  // Pure substitution difference.
  CHECK(MismatchRate({3, 0, 9}, {3, 0, 5}, 0) == 0.0);
  // Oracle (C,A,T) vs candidate (C,T): one deletion.
  CHECK(MismatchRate({3, 0, 5, 0}, {3, 0, 2, 5}, 0) == doctest::Approx(1.0 / 3.0));
  // Empty oracle collapse uses denominator 1.
  CHECK(MismatchRate({0, 3}, {0, 0}, 0) == doctest::Approx(1.0));
  // MR(x, x) == 0 for random alignments.
  Rng rng(406);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> align(rng.UniformInt(1, 12));
    for (int& v : align) v = rng.Bernoulli(0.5) ? 0 : rng.UniformInt(2, 5);
    CHECK(MismatchRate(align, align, 0) == 0.0);
  }
}

TEST_CASE("diagnostics: lper, histogram, and bucket wer") {
  // Four utterances; one length error (u2 drops a token).
  std::vector<AlignedUtt> oracles = {
      {"u0", {3, 0, 2}, {}, {}},
      {"u1", {4, 4, 0}, {}, {}},
      {"u2", {3, 0, 5, 0}, {}, {}},
      {"u3", {2, 0, 2}, {}, {}},
  };
  std::vector<AlignedUtt> candidates = {
      {"u0", {3, 0, 2}, {3, 2}, {3, 2}},        // exact
      {"u1", {4, 0, 0}, {4}, {4}},              // same length, exact hyp
      {"u2", {3, 3, 0, 0}, {3, 5}, {3}},        // one token short, 1 del
      {"u3", {2, 0, 5}, {2, 2}, {2, 5}},        // same length, 1 sub
  };
  AlignmentDiagnostics d = ComputeAlignmentDiagnostics(candidates, oracles, 0);
  CHECK(d.num_utterances == 4);
  CHECK(d.lper == doctest::Approx(0.25));

  int total = 0;
  for (const auto& [key, bucket] : d.length_error_hist) total += bucket.count;
  CHECK(total == 4);
  CHECK(d.length_error_hist.at(0).count == 3);
  CHECK(d.length_error_hist.at(-1).count == 1);
  // LPER is exactly the mass outside bucket zero.
  CHECK(d.lper ==
        doctest::Approx(1.0 - static_cast<double>(d.length_error_hist.at(0).count) /
                                  d.num_utterances));
  // Bucket WERs pool (S+D+I) over member utterances.
  CHECK(d.length_error_hist.at(-1).wer() == doctest::Approx(0.5));
  CHECK(d.length_error_hist.at(0).wer() == doctest::Approx(1.0 / 5.0));

  // Pooled MR: u2 contributes one deletion; oracle lengths pool to 7.
  CHECK(d.mr == doctest::Approx(1.0 / 7.0));
  AlignmentDiagnostics dp =
      ComputeAlignmentDiagnostics(candidates, oracles, 0, /*per_utterance_mr=*/true);
  CHECK(dp.mr == doctest::Approx((0.0 + 0.0 + 1.0 / 2.0 + 0.0) / 4.0));

  // Pairing is strict.
  std::vector<AlignedUtt> renamed = candidates;
  renamed[1].utt_id = "ghost";
  CHECK_THROWS_AS(ComputeAlignmentDiagnostics(renamed, oracles, 0), ContractError);
  std::vector<AlignedUtt> truncated(oracles.begin(), oracles.end() - 1);
  CHECK_THROWS_AS(ComputeAlignmentDiagnostics(candidates, truncated, 0),
                  ContractError);
}
