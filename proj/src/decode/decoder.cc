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

#include "cassnat/decode/decoder.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include <json.hpp>

#include "cassnat/ctc/ctc.h"
#include "cassnat/data/batch.h"
#include "cassnat/util/common.h"
#include "cassnat/util/parallel.h"
#include "cassnat/util/rng.h"

namespace cassnat {
namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(const Clock::time_point& start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool IsAlignmentMethod(const std::string& method) {
  return method == "oracle" || method == "bpa" || method == "bsa" ||
         method == "esa";
}

// Summed log-probability of the per-position argmax tokens, up to and
// including the first EOS position.
double ArgmaxConfidence(const Tensor& logits, int eos_id) {
  double total = 0.0;
  const int v = logits.cols();
  for (int r = 0; r < logits.rows(); ++r) {
    int best = 0;
    double mx = logits.at2(r, 0);
    for (int c = 1; c < v; ++c) {
      if (logits.at2(r, c) > mx) {
        mx = logits.at2(r, c);
        best = c;
      }
    }
    double z = 0.0;
    for (int c = 0; c < v; ++c) z += std::exp(logits.at2(r, c) - mx);
    total += -std::log(z);  // mx - (mx + log z)
    if (best == eos_id) break;
  }
  return total;
}

// The frame-level alignment behind one non-ESA method.
std::vector<int> GenerateAlignment(const EncoderOutput& enc,
                                   const Utterance& utt,
                                   const Vocabulary& vocab,
                                   const DecodeOptions& opts) {
  if (opts.method == "bpa") return BestPathAlign(enc.ctc_logits).ids;
  if (opts.method == "bsa") {
    return BeamSearchAlign(enc.ctc_logits, opts.beam_width, vocab).ids;
  }
  CheckContract(opts.method == "oracle", "unknown alignment method");
  CheckContract(!utt.transcript.empty(),
                "oracle decoding needs the reference transcript");
  const auto forced = ViterbiAlign(enc.ctc_logits, utt.transcript, vocab);
  // A transcript too long for the subsampled frame grid has no forced
  // alignment; the best-path alignment stands in so the run can finish.
  if (!forced.has_value()) return BestPathAlign(enc.ctc_logits).ids;
  return forced->ids;
}

DecodeResult DecodeAlignmentMethod(const CassNatModel& model,
                                   const AtModel* scorer,
                                   const Utterance& utt,
                                   const Vocabulary& vocab,
                                   const DecodeOptions& opts,
                                   uint64_t utt_index) {
  DecodeResult result;
  result.utt_id = utt.utt_id;
  result.source = opts.method;

  const Clock::time_point start = Clock::now();
  const Tensor features = FeatureTensor(utt);
  const EncoderOutput enc = model.RunEncoder(features, -1, TrainCtx{});

  if (opts.method == "esa") {
    EsaConfig esa;
    esa.tau = opts.tau;
    esa.num_samples = opts.num_samples;
    esa.seed = Rng::Mix(opts.seed, utt_index);
    const std::vector<Alignment> samples = EsaSample(enc.ctc_logits, esa);

    // Duplicate alignments collapse onto one decoder pass and one score.
    std::map<std::vector<int>, int> unique_index;
    std::vector<int> sample_to_unique(samples.size());
    std::vector<const std::vector<int>*> unique_ids;
    for (size_t s = 0; s < samples.size(); ++s) {
      auto [it, inserted] = unique_index.try_emplace(
          samples[s].ids, static_cast<int>(unique_ids.size()));
      if (inserted) unique_ids.push_back(&it->first);
      sample_to_unique[s] = it->second;
    }

    const EncoderOutput at_enc =
        scorer->RunEncoder(features, -1, TrainCtx{});
    std::vector<std::vector<int>> unique_hyps(unique_ids.size());
    std::vector<CandidateScore> unique_scores(unique_ids.size());
    for (size_t u = 0; u < unique_ids.size(); ++u) {
      const CassNatOutput out =
          model.RunDecoder(enc, *unique_ids[u], TrainCtx{});
      unique_hyps[u] =
          ArgmaxTokens(out.logits, vocab.eos_id, vocab.blank_id);
      unique_scores[u].confidence =
          ArgmaxConfidence(out.logits, vocab.eos_id);
      const std::vector<int>& to_score =
          opts.score_collapsed ? out.collapse : unique_hyps[u];
      unique_scores[u].ranking = scorer->Score(at_enc, to_score);
    }

    result.candidate_scores.reserve(samples.size());
    int best = 0;
    for (size_t s = 0; s < samples.size(); ++s) {
      result.candidate_scores.push_back(unique_scores[sample_to_unique[s]]);
      if (result.candidate_scores[s].ranking >
          result.candidate_scores[best].ranking) {
        best = static_cast<int>(s);
      }
    }
    result.selected = best;
    result.alignment = samples[best].ids;
    result.hypothesis = unique_hyps[sample_to_unique[best]];
    result.wall_time_s = SecondsSince(start);
    return result;
  }

  result.alignment = GenerateAlignment(enc, utt, vocab, opts);
  const CassNatOutput out =
      model.RunDecoder(enc, result.alignment, TrainCtx{});
  result.hypothesis = ArgmaxTokens(out.logits, vocab.eos_id, vocab.blank_id);
  CandidateScore score;
  score.confidence = ArgmaxConfidence(out.logits, vocab.eos_id);
  if (scorer != nullptr) {
    const EncoderOutput at_enc =
        scorer->RunEncoder(features, -1, TrainCtx{});
    score.ranking = scorer->Score(at_enc, result.hypothesis);
  } else {
    score.ranking = score.confidence;
  }
  result.candidate_scores.push_back(score);
  result.selected = 0;
  result.wall_time_s = SecondsSince(start);
  return result;
}

DecodeResult DecodeAtMethod(const AtModel& at, const Utterance& utt,
                            const DecodeOptions& opts) {
  DecodeResult result;
  result.utt_id = utt.utt_id;
  result.source = opts.method;

  const Clock::time_point start = Clock::now();
  const EncoderOutput enc =
      at.RunEncoder(FeatureTensor(utt), -1, TrainCtx{});
  const bool greedy = opts.method == "at_greedy";
  const AtDecodeResult decoded = at.Decode(enc, greedy ? "greedy" : "beam",
                                           greedy ? 1 : opts.beam_width);
  result.hypothesis = decoded.tokens;
  result.candidate_scores.push_back({decoded.score, decoded.score});
  result.selected = 0;
  result.wall_time_s = SecondsSince(start);
  return result;
}

}  // namespace

void DecodeOptions::Validate() const {
  CheckContract(IsAlignmentMethod(method) || method == "at_greedy" ||
                    method == "at_beam",
                "unknown decode method: " + method);
  CheckContract(tau > 0.0 && tau <= 1.0, "tau must lie in (0, 1]");
  CheckContract(num_samples >= 1, "num_samples must be positive");
  CheckContract(beam_width >= 1, "beam_width must be positive");
}

std::vector<int> DecodeWithAlignment(const CassNatModel& model,
                                     const Tensor& features,
                                     const std::vector<int>& alignment_ids) {
  NoGradGuard guard;
  const EncoderOutput enc = model.RunEncoder(features, -1, TrainCtx{});
  const CassNatOutput out = model.RunDecoder(enc, alignment_ids, TrainCtx{});
  return ArgmaxTokens(out.logits, model.vocab().eos_id,
                      model.vocab().blank_id);
}

DecodeResult DecodeOne(const CassNatModel* model, const AtModel* scorer,
                       const Utterance& utt, const Vocabulary& vocab,
                       const DecodeOptions& opts, uint64_t utt_index) {
  opts.Validate();
  NoGradGuard guard;
  if (!IsAlignmentMethod(opts.method)) {
    CheckContract(scorer != nullptr,
                  "at_* decoding needs the autoregressive model");
    return DecodeAtMethod(*scorer, utt, opts);
  }
  CheckContract(model != nullptr, "alignment decoding needs the model");
  CheckContract(opts.method != "esa" || scorer != nullptr,
                "esa ranking needs the scoring model");
  return DecodeAlignmentMethod(*model, scorer, utt, vocab, opts, utt_index);
}

CorpusDecodeResult DecodeCorpus(const CassNatModel* model,
                                const AtModel* scorer,
                                const std::vector<Utterance>& utts,
                                const Vocabulary& vocab,
                                const DecodeOptions& opts,
                                double baseline_mean_time_s) {
  opts.Validate();
  if (opts.method == "oracle") {
    for (const Utterance& utt : utts) {
      CheckContract(!utt.transcript.empty(),
                    "oracle decoding needs every reference transcript");
    }
  }

  CorpusDecodeResult out;
  out.results.resize(utts.size());
  ParallelFor(static_cast<int>(utts.size()), opts.num_threads, [&](int i) {
    out.results[i] = DecodeOne(model, scorer, utts[i], vocab, opts,
                               static_cast<uint64_t>(i));
  });

  CorpusWer wer;
  double total_time = 0.0;
  std::vector<AlignedUtt> candidates, oracles;
  {
    NoGradGuard guard;
    for (size_t i = 0; i < utts.size(); ++i) {
      const DecodeResult& r = out.results[i];
      wer.Add(utts[i].transcript, r.hypothesis);
      total_time += r.wall_time_s;
      if (!IsAlignmentMethod(opts.method) || utts[i].transcript.empty()) {
        continue;
      }
      const EncoderOutput enc =
          model->RunEncoder(FeatureTensor(utts[i]), -1, TrainCtx{});
      const auto forced =
          ViterbiAlign(enc.ctc_logits, utts[i].transcript, vocab);
      if (!forced.has_value()) continue;  // no reference alignment exists
      AlignedUtt cand;
      cand.utt_id = r.utt_id;
      cand.align = r.alignment;
      cand.ref = utts[i].transcript;
      cand.hyp = r.hypothesis;
      candidates.push_back(std::move(cand));
      AlignedUtt oracle;
      oracle.utt_id = r.utt_id;
      oracle.align = forced->ids;
      oracles.push_back(std::move(oracle));
    }
  }

  std::sort(out.results.begin(), out.results.end(),
            [](const DecodeResult& a, const DecodeResult& b) {
              return a.utt_id < b.utt_id;
            });

  CorpusDecodeSummary& summary = out.summary;
  summary.wer = wer.rate();
  summary.edits = wer.counts;
  summary.num_utterances = static_cast<int>(utts.size());
  summary.num_oracle_feasible = static_cast<int>(candidates.size());
  summary.mean_wall_time_s =
      utts.empty() ? 0.0 : total_time / static_cast<double>(utts.size());
  summary.speedup_vs_baseline =
      (baseline_mean_time_s > 0.0 && summary.mean_wall_time_s > 0.0)
          ? baseline_mean_time_s / summary.mean_wall_time_s
          : 0.0;
  if (!candidates.empty()) {
    const AlignmentDiagnostics diag =
        ComputeAlignmentDiagnostics(candidates, oracles, vocab.blank_id);
    summary.mr = diag.mr;
    summary.lper = diag.lper;
  } else {
    summary.mr = std::numeric_limits<double>::quiet_NaN();
    summary.lper = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

void WriteResultsJsonl(const std::string& path,
                       const std::vector<DecodeResult>& results,
                       const std::vector<Utterance>& utts) {
  std::map<std::string, const std::vector<int>*> refs;
  for (const Utterance& utt : utts) refs[utt.utt_id] = &utt.transcript;

  std::ofstream file(path, std::ios::trunc);
  CheckContract(file.good(), "cannot open results file: " + path);
  for (const DecodeResult& r : results) {
    const auto it = refs.find(r.utt_id);
    CheckContract(it != refs.end(), "result for unknown utterance " + r.utt_id);
    nlohmann::json line;
    line["utt_id"] = r.utt_id;
    line["method"] = r.source;
    line["hypothesis"] = r.hypothesis;
    line["ref"] = *it->second;
    line["alignment"] = r.alignment;
    line["score"] = r.candidate_scores.empty()
                        ? 0.0
                        : r.candidate_scores[r.selected].ranking;
    line["wall_time_s"] = r.wall_time_s;
    file << line.dump() << "\n";
  }
  CheckContract(file.good(), "failed writing results file: " + path);
}

void WriteSummaryJson(const std::string& path,
                      const CorpusDecodeSummary& summary) {
  nlohmann::json j;
  j["wer"] = summary.wer;
  j["substitutions"] = summary.edits.sub;
  j["deletions"] = summary.edits.del;
  j["insertions"] = summary.edits.ins;
  j["mr"] = std::isfinite(summary.mr) ? nlohmann::json(summary.mr)
                                      : nlohmann::json(nullptr);
  j["lper"] = std::isfinite(summary.lper) ? nlohmann::json(summary.lper)
                                          : nlohmann::json(nullptr);
  j["mean_time"] = summary.mean_wall_time_s;
  j["speedup_vs_baseline"] = summary.speedup_vs_baseline;
  j["num_utterances"] = summary.num_utterances;
  j["num_oracle_feasible"] = summary.num_oracle_feasible;
  std::ofstream file(path, std::ios::trunc);
  CheckContract(file.good(), "cannot open summary file: " + path);
  file << j.dump(2) << "\n";
  CheckContract(file.good(), "failed writing summary file: " + path);
}

}  // namespace cassnat
