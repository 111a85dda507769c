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

#include "cassnat/ctc/ctc.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

namespace cassnat {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogAdd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double hi = std::max(a, b);
  double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

void ValidateGrid(const Tensor& logits, int vocab_size) {
  CheckContract(logits.defined() && logits.rank() == 2 && logits.dim(0) >= 1,
                "ctc: logits must be a nonempty T x V tensor");
  if (vocab_size >= 0 && logits.dim(1) != vocab_size) {
    throw DimensionError("ctc: logits have " + std::to_string(logits.dim(1)) +
                         " columns for a vocabulary of " +
                         std::to_string(vocab_size));
  }
}

void ValidateTarget(const std::vector<int>& target, const Vocabulary& vocab) {
  for (int id : target) {
    CheckContract(id >= 0 && id < vocab.size(),
                  "ctc: target id " + std::to_string(id) + " out of range");
    CheckContract(id != vocab.blank_id, "ctc: blank inside target");
  }
}

// Row-normalized log grid computed outside the autodiff graph.
std::vector<double> LogProbGrid(const Tensor& logits) {
  const int t_frames = logits.dim(0), v = logits.dim(1);
  std::vector<double> grid(static_cast<size_t>(t_frames) * v);
  const auto& raw = logits.data();
  for (int t = 0; t < t_frames; ++t) {
    const double* x = raw.data() + static_cast<size_t>(t) * v;
    double* y = grid.data() + static_cast<size_t>(t) * v;
    double hi = x[0];
    for (int j = 1; j < v; ++j) hi = std::max(hi, x[j]);
    double z = 0.0;
    for (int j = 0; j < v; ++j) z += std::exp(x[j] - hi);
    double lz = hi + std::log(z);
    for (int j = 0; j < v; ++j) y[j] = x[j] - lz;
  }
  return grid;
}

// blank, y1, blank, y2, ..., blank.
std::vector<int> ExpandedStates(const std::vector<int>& target, int blank_id) {
  std::vector<int> states(2 * target.size() + 1, blank_id);
  for (size_t u = 0; u < target.size(); ++u) states[2 * u + 1] = target[u];
  return states;
}

// Skip transition s-2 -> s exists only into a label state whose label
// differs from the skipped-over one.
bool SkipAllowed(const std::vector<int>& states, int s) {
  return s % 2 == 1 && s >= 2 && states[s] != states[s - 2];
}

// Top-k token indices of one frame by log-probability, ties to the lowest
// index.
std::vector<int> TopSymbols(const double* row, int v, int k) {
  std::vector<int> idx(v);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [row](int a, int b) { return row[a] > row[b]; });
  idx.resize(std::min(k, v));
  return idx;
}

}  // namespace

bool CtcFeasible(int num_frames, const std::vector<int>& target) {
  int repeats = 0;
  for (size_t i = 1; i < target.size(); ++i) {
    if (target[i] == target[i - 1]) ++repeats;
  }
  return num_frames >= static_cast<int>(target.size()) + repeats;
}

std::optional<Tensor> CtcLogProb(const Tensor& logits,
                                 const std::vector<int>& target,
                                 const Vocabulary& vocab) {
  ValidateGrid(logits, vocab.size());
  ValidateTarget(target, vocab);
  const int t_frames = logits.dim(0);
  if (!CtcFeasible(t_frames, target)) return std::nullopt;

  Tensor logp = ops::LogSoftmax(logits);
  if (target.empty()) {
    // Single all-blank path.
    return ops::ReduceSum(ops::GatherCols(logp, {vocab.blank_id}));
  }

  const std::vector<int> states = ExpandedStates(target, vocab.blank_id);
  const int s_states = static_cast<int>(states.size());
  Tensor emissions = ops::GatherCols(logp, states);  // [T, S]

  std::vector<uint8_t> start_mask(s_states, 0);
  for (int s = 2; s < s_states; ++s) start_mask[s] = 1;
  std::vector<uint8_t> no_skip(s_states, 0);
  for (int s = 0; s < s_states; ++s) no_skip[s] = SkipAllowed(states, s) ? 0 : 1;

  Tensor zero1 = Tensor::Full({1, 1}, kLogZero);
  Tensor zero2 = Tensor::Full({1, 2}, kLogZero);

  Tensor alpha = ops::MaskedFill(ops::Slice(emissions, 0, 1, 0, s_states),
                                 start_mask, kLogZero);
  for (int t = 1; t < t_frames; ++t) {
    Tensor from1 =
        ops::Concat({zero1, ops::Slice(alpha, 0, 1, 0, s_states - 1)}, 1);
    Tensor from2 = ops::MaskedFill(
        ops::Concat({zero2, ops::Slice(alpha, 0, 1, 0, s_states - 2)}, 1),
        no_skip, kLogZero);
    Tensor comb = ops::LogAddExp(ops::LogAddExp(alpha, from1), from2);
    alpha = ops::Add(comb, ops::Slice(emissions, t, t + 1, 0, s_states));
  }
  Tensor total =
      ops::LogAddExp(ops::Slice(alpha, 0, 1, s_states - 1, s_states),
                     ops::Slice(alpha, 0, 1, s_states - 2, s_states - 1));
  return ops::Reshape(total, {1});
}

std::optional<Alignment> ViterbiAlign(const Tensor& logits,
                                      const std::vector<int>& target,
                                      const Vocabulary& vocab) {
  ValidateGrid(logits, vocab.size());
  ValidateTarget(target, vocab);
  const int t_frames = logits.dim(0), v = logits.dim(1);
  if (!CtcFeasible(t_frames, target)) return std::nullopt;
  const std::vector<double> logp = LogProbGrid(logits);

  Alignment out;
  if (target.empty()) {
    out.ids.assign(t_frames, vocab.blank_id);
    for (int t = 0; t < t_frames; ++t) {
      out.frame_logprob.push_back(
          logp[static_cast<size_t>(t) * v + vocab.blank_id]);
      out.logprob += out.frame_logprob.back();
    }
    return out;
  }

  const std::vector<int> states = ExpandedStates(target, vocab.blank_id);
  const int s_states = static_cast<int>(states.size());
  std::vector<double> score(static_cast<size_t>(t_frames) * s_states,
                            kNegInf);
  std::vector<int> parent(static_cast<size_t>(t_frames) * s_states, -1);
  score[0] = logp[vocab.blank_id];
  score[1] = logp[states[1]];
  for (int t = 1; t < t_frames; ++t) {
    const double* prev = score.data() + static_cast<size_t>(t - 1) * s_states;
    double* cur = score.data() + static_cast<size_t>(t) * s_states;
    int* par = parent.data() + static_cast<size_t>(t) * s_states;
    for (int s = 0; s < s_states; ++s) {
      // Ties prefer staying, then s-1, then the skip: strict improvement
      // required to switch.
      double best = prev[s];
      int from = s;
      if (s >= 1 && prev[s - 1] > best) {
        best = prev[s - 1];
        from = s - 1;
      }
      if (SkipAllowed(states, s) && prev[s - 2] > best) {
        best = prev[s - 2];
        from = s - 2;
      }
      if (best == kNegInf) continue;
      cur[s] = best + logp[static_cast<size_t>(t) * v + states[s]];
      par[s] = from;
    }
  }
  const double* last = score.data() + static_cast<size_t>(t_frames - 1) * s_states;
  int s = last[s_states - 1] >= last[s_states - 2] ? s_states - 1
                                                   : s_states - 2;
  out.logprob = last[s];
  out.ids.assign(t_frames, vocab.blank_id);
  for (int t = t_frames - 1; t >= 0; --t) {
    out.ids[t] = states[s];
    if (t > 0) s = parent[static_cast<size_t>(t) * s_states + s];
  }
  out.frame_logprob.resize(t_frames);
  for (int t = 0; t < t_frames; ++t) {
    out.frame_logprob[t] = logp[static_cast<size_t>(t) * v + out.ids[t]];
  }
  return out;
}

Alignment BestPathAlign(const Tensor& logits) {
  ValidateGrid(logits, -1);
  const int t_frames = logits.dim(0), v = logits.dim(1);
  const std::vector<double> logp = LogProbGrid(logits);
  Alignment out;
  out.ids.resize(t_frames);
  out.frame_logprob.resize(t_frames);
  for (int t = 0; t < t_frames; ++t) {
    const double* row = logp.data() + static_cast<size_t>(t) * v;
    int arg = 0;
    for (int j = 1; j < v; ++j) {
      if (row[j] > row[arg]) arg = j;
    }
    out.ids[t] = arg;
    out.frame_logprob[t] = row[arg];
    out.logprob += row[arg];
  }
  return out;
}

Alignment BeamSearchAlign(const Tensor& logits, int beam_width,
                          const Vocabulary& vocab) {
  ValidateGrid(logits, vocab.size());
  CheckContract(beam_width >= 1, "beam search: width must be positive");
  const int t_frames = logits.dim(0), v = logits.dim(1);
  const std::vector<double> logp = LogProbGrid(logits);

  // Prefix -> (log prob ending in blank, log prob ending in the last token).
  using Probs = std::pair<double, double>;
  std::map<std::vector<int>, Probs> beam;
  beam[{}] = {0.0, kNegInf};
  for (int t = 0; t < t_frames; ++t) {
    const double* row = logp.data() + static_cast<size_t>(t) * v;
    const std::vector<int> symbols = TopSymbols(row, v, beam_width);
    std::map<std::vector<int>, Probs> next;
    auto slot = [&next](const std::vector<int>& key) -> Probs& {
      return next.emplace(key, Probs{kNegInf, kNegInf}).first->second;
    };
    for (const auto& [prefix, pp] : beam) {
      const auto [pb, pnb] = pp;
      const double ptot = LogAdd(pb, pnb);
      for (int sym : symbols) {
        const double ps = row[sym];
        if (sym == vocab.blank_id) {
          Probs& e = slot(prefix);
          e.first = LogAdd(e.first, ptot + ps);
        } else if (!prefix.empty() && prefix.back() == sym) {
          Probs& same = slot(prefix);
          same.second = LogAdd(same.second, pnb + ps);
          if (pb != kNegInf) {
            std::vector<int> ext = prefix;
            ext.push_back(sym);
            Probs& e = slot(ext);
            e.second = LogAdd(e.second, pb + ps);
          }
        } else {
          std::vector<int> ext = prefix;
          ext.push_back(sym);
          Probs& e = slot(ext);
          e.second = LogAdd(e.second, ptot + ps);
        }
      }
    }
    // Keep the top beam_width prefixes by total mass. A stable sort over the
    // map's lexicographic order makes ties deterministic.
    std::vector<std::pair<std::vector<int>, Probs>> items;
    for (auto& kv : next) {
      if (LogAdd(kv.second.first, kv.second.second) != kNegInf) {
        items.push_back(std::move(kv));
      }
    }
    std::stable_sort(items.begin(), items.end(),
                     [](const auto& a, const auto& b) {
                       return LogAdd(a.second.first, a.second.second) >
                              LogAdd(b.second.first, b.second.second);
                     });
    if (static_cast<int>(items.size()) > beam_width) {
      items.resize(beam_width);
    }
    beam.clear();
    for (auto& kv : items) beam.emplace(std::move(kv.first), kv.second);
  }

  const std::vector<int>* best = nullptr;
  double best_total = kNegInf;
  for (const auto& [prefix, pp] : beam) {
    double total = LogAdd(pp.first, pp.second);
    if (total > best_total) {
      best_total = total;
      best = &prefix;
    }
  }
  CheckContract(best != nullptr, "beam search: empty beam");
  std::optional<Alignment> forced = ViterbiAlign(logits, *best, vocab);
  CheckContract(forced.has_value(),
                "beam search: winning prefix is not alignable");
  return *forced;
}

std::vector<Alignment> EsaSample(const Tensor& logits, const EsaConfig& cfg) {
  ValidateGrid(logits, -1);
  CheckContract(cfg.tau > 0.0 && cfg.tau <= 1.0,
                "esa: tau must be in (0, 1]");
  CheckContract(cfg.num_samples >= 1, "esa: need at least one sample");
  const int t_frames = logits.dim(0), v = logits.dim(1);
  CheckContract(v >= 2, "esa: vocabulary too small for top-2 sampling");
  const std::vector<double> logp = LogProbGrid(logits);

  // Per frame: the two best tokens (ties to the lowest index) and whether
  // the frame is confident enough to skip sampling.
  std::vector<int> top1(t_frames), top2(t_frames);
  std::vector<bool> confident(t_frames);
  for (int t = 0; t < t_frames; ++t) {
    const double* row = logp.data() + static_cast<size_t>(t) * v;
    std::vector<int> best = TopSymbols(row, v, 2);
    top1[t] = best[0];
    top2[t] = best[1];
    confident[t] = std::exp(row[best[0]]) > cfg.tau;
  }

  Rng rng(cfg.seed);
  std::vector<Alignment> samples;
  samples.reserve(cfg.num_samples);
  for (int i = 0; i < cfg.num_samples; ++i) {
    Alignment a;
    a.ids.resize(t_frames);
    a.frame_logprob.resize(t_frames);
    for (int t = 0; t < t_frames; ++t) {
      int chosen =
          confident[t] ? top1[t] : (rng.Bernoulli(0.5) ? top1[t] : top2[t]);
      a.ids[t] = chosen;
      a.frame_logprob[t] = logp[static_cast<size_t>(t) * v + chosen];
      a.logprob += a.frame_logprob[t];
    }
    samples.push_back(std::move(a));
  }
  return samples;
}

std::optional<CtcGrad> CtcGradOracle(const Tensor& logits,
                                     const std::vector<int>& target,
                                     const Vocabulary& vocab) {
  ValidateGrid(logits, vocab.size());
  ValidateTarget(target, vocab);
  const int t_frames = logits.dim(0), v = logits.dim(1);
  if (!CtcFeasible(t_frames, target)) return std::nullopt;
  const std::vector<double> logp = LogProbGrid(logits);

  CtcGrad out;
  out.grad.resize(static_cast<size_t>(t_frames) * v);
  if (target.empty()) {
    for (int t = 0; t < t_frames; ++t) {
      out.logprob += logp[static_cast<size_t>(t) * v + vocab.blank_id];
      for (int j = 0; j < v; ++j) {
        out.grad[static_cast<size_t>(t) * v + j] =
            std::exp(logp[static_cast<size_t>(t) * v + j]) -
            (j == vocab.blank_id ? 1.0 : 0.0);
      }
    }
    return out;
  }

  const std::vector<int> states = ExpandedStates(target, vocab.blank_id);
  const int s_states = static_cast<int>(states.size());
  auto emit = [&](int t, int s) {
    return logp[static_cast<size_t>(t) * v + states[s]];
  };

  // alpha includes the emission at t; beta covers emissions strictly after
  // t, so alpha[t][s] + beta[t][s] is the mass of all paths through (t, s).
  std::vector<double> alpha(static_cast<size_t>(t_frames) * s_states,
                            kNegInf);
  std::vector<double> beta(static_cast<size_t>(t_frames) * s_states, kNegInf);
  alpha[0] = emit(0, 0);
  alpha[1] = emit(0, 1);
  for (int t = 1; t < t_frames; ++t) {
    const double* prev = alpha.data() + static_cast<size_t>(t - 1) * s_states;
    double* cur = alpha.data() + static_cast<size_t>(t) * s_states;
    for (int s = 0; s < s_states; ++s) {
      double acc = prev[s];
      if (s >= 1) acc = LogAdd(acc, prev[s - 1]);
      if (SkipAllowed(states, s)) acc = LogAdd(acc, prev[s - 2]);
      if (acc == kNegInf) continue;
      cur[s] = acc + emit(t, s);
    }
  }
  double* beta_last = beta.data() + static_cast<size_t>(t_frames - 1) * s_states;
  beta_last[s_states - 1] = 0.0;
  beta_last[s_states - 2] = 0.0;
  for (int t = t_frames - 2; t >= 0; --t) {
    const double* nxt = beta.data() + static_cast<size_t>(t + 1) * s_states;
    double* cur = beta.data() + static_cast<size_t>(t) * s_states;
    for (int s = 0; s < s_states; ++s) {
      double acc = nxt[s] + emit(t + 1, s);
      if (s + 1 < s_states) acc = LogAdd(acc, nxt[s + 1] + emit(t + 1, s + 1));
      if (s + 2 < s_states && SkipAllowed(states, s + 2)) {
        acc = LogAdd(acc, nxt[s + 2] + emit(t + 1, s + 2));
      }
      cur[s] = acc;
    }
  }
  const double* alpha_last =
      alpha.data() + static_cast<size_t>(t_frames - 1) * s_states;
  out.logprob = LogAdd(alpha_last[s_states - 1], alpha_last[s_states - 2]);

  for (int t = 0; t < t_frames; ++t) {
    // Per-token posterior mass at frame t.
    std::vector<double> gamma(v, kNegInf);
    for (int s = 0; s < s_states; ++s) {
      double joint = alpha[static_cast<size_t>(t) * s_states + s] +
                     beta[static_cast<size_t>(t) * s_states + s];
      gamma[states[s]] = LogAdd(gamma[states[s]], joint);
    }
    for (int j = 0; j < v; ++j) {
      double post =
          gamma[j] == kNegInf ? 0.0 : std::exp(gamma[j] - out.logprob);
      out.grad[static_cast<size_t>(t) * v + j] =
          std::exp(logp[static_cast<size_t>(t) * v + j]) - post;
    }
  }
  return out;
}

double AlignmentLogProb(const Tensor& logits,
                        const std::vector<int>& alignment_ids) {
  ValidateGrid(logits, -1);
  const int t_frames = logits.dim(0), v = logits.dim(1);
  CheckContract(static_cast<int>(alignment_ids.size()) == t_frames,
                "alignment logprob: frame count mismatch");
  const std::vector<double> logp = LogProbGrid(logits);
  double total = 0.0;
  for (int t = 0; t < t_frames; ++t) {
    int id = alignment_ids[t];
    CheckContract(id >= 0 && id < v, "alignment logprob: id out of range");
    total += logp[static_cast<size_t>(t) * v + id];
  }
  return total;
}

}  // namespace cassnat
