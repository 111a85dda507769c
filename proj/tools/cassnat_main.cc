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

// cassnat: single-step non-autoregressive speech recognition at desk scale.
//
// Subcommands: synth, train, decode, analyze, dump-embeddings. Every
// hyper-parameter lives in a strict JSON config (docs/config-schema.json);
// flags override file values. Each command writes into its own subdirectory
// of output_dir next to a resolved_config.json echo of the effective
// configuration. Exit codes: 0 success, 2 usage or config problem, 3 runtime
// abort (non-finite loss), 4 missing input file.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cassnat/ctc/ctc.h"
#include "cassnat/data/batch.h"
#include "cassnat/data/corpus.h"
#include "cassnat/decode/decoder.h"
#include "cassnat/eval/metrics.h"
#include "cassnat/models/at_model.h"
#include "cassnat/models/cassnat_model.h"
#include "cassnat/models/trainer.h"
#include "cassnat/numcore/checkpoint.h"
#include "cassnat/util/common.h"
#include "cassnat/util/config.h"

namespace cassnat {
namespace {

namespace fs = std::filesystem;

void WriteResolvedConfig(const ExperimentConfig& cfg, const std::string& dir) {
  fs::create_directories(dir);
  std::ofstream f(dir + "/resolved_config.json", std::ios::trunc);
  CheckContract(f.good(), "cannot write resolved config in " + dir);
  f << ExperimentConfigToJson(cfg).dump(2) << "\n";
}

Corpus LoadCorpusOrDie(const ExperimentConfig& cfg) {
  if (cfg.corpus_path.empty()) {
    throw ConfigError("corpus.path is required for this command "
                      "(see docs/config-schema.json)");
  }
  if (!fs::exists(cfg.corpus_path)) {
    throw MissingInputError("corpus file not found: " + cfg.corpus_path);
  }
  return LoadCorpus(cfg.corpus_path);
}

// The corpus is the authority on vocabulary and feature sizes; explicit
// config values must agree, absent ones are filled in.
void ResolveModelDims(ExperimentConfig* cfg, const Corpus& corpus) {
  const int vocab_size = corpus.vocab.size();
  const int feat_dim = corpus.spec.feat_dim;
  if (cfg->model_vocab_explicit && cfg->model.vocab_size != vocab_size) {
    throw ConfigError("model.vocab_size " +
                      std::to_string(cfg->model.vocab_size) +
                      " disagrees with the corpus vocabulary (" +
                      std::to_string(vocab_size) + " incl. blank and EOS)");
  }
  if (cfg->model_feat_explicit && cfg->model.feat_dim != feat_dim) {
    throw ConfigError("model.feat_dim " + std::to_string(cfg->model.feat_dim) +
                      " disagrees with the corpus feature dimension (" +
                      std::to_string(feat_dim) + ")");
  }
  cfg->model.vocab_size = vocab_size;
  cfg->model.feat_dim = feat_dim;
  cfg->model.Validate();
}

// Copies every "enc." parameter of a checkpoint into the store (used to
// warm-start the recognizer's encoder from a trained baseline).
int CopyEncoderParams(const std::string& ckpt_path, ParamStore* store) {
  int copied = 0;
  for (const CheckpointEntry& e : LoadCheckpoint(ckpt_path)) {
    if (e.name.rfind("enc.", 0) != 0) continue;
    CheckContract(store->Has(e.name),
                  "init-encoder: checkpoint parameter " + e.name +
                      " does not exist in this model");
    Tensor t = store->Get(e.name);
    CheckContract(t.shape() == e.shape,
                  "init-encoder: shape mismatch for " + e.name);
    t.data() = e.values;
    ++copied;
  }
  CheckContract(copied > 0, "init-encoder: no encoder parameters in " +
                                ckpt_path);
  return copied;
}

struct SynthArgs {
  std::string config_path;
  std::string out_override;
  bool force = false;
};

void RunSynth(const SynthArgs& args) {
  ExperimentConfig cfg = LoadExperimentConfig(args.config_path);
  if (!args.out_override.empty()) cfg.corpus_path = args.out_override;
  if (!cfg.has_synth_spec) {
    throw ConfigError("synth needs corpus.spec "
                      "(see docs/config-schema.json)");
  }
  if (cfg.corpus_path.empty()) {
    throw ConfigError("synth needs corpus.path (the file to write)");
  }
  if (fs::exists(cfg.corpus_path) && !args.force) {
    throw ConfigError("refusing to overwrite " + cfg.corpus_path +
                      " without --force");
  }

  const Corpus corpus = Synthesize(cfg.synth_spec);
  if (const fs::path parent = fs::path(cfg.corpus_path).parent_path();
      !parent.empty()) {
    fs::create_directories(parent);
  }
  SaveCorpus(corpus, cfg.corpus_path);
  WriteResolvedConfig(cfg, cfg.output_dir + "/synth");

  std::cout << "wrote " << cfg.corpus_path << ": "
            << corpus.train.size() << " train / " << corpus.dev.size()
            << " dev / " << corpus.test.size() << " test utterances, vocab "
            << corpus.vocab.size() << " (incl. blank and EOS)\n";
}

struct TrainArgs {
  std::string config_path;
  std::string model_kind;  // at | cassnat
  std::string init_encoder;
  bool resume = false;
  std::optional<uint64_t> seed;
  std::optional<int> max_epochs;
};

void RunTrain(const TrainArgs& args) {
  ExperimentConfig cfg = LoadExperimentConfig(args.config_path);
  if (args.seed) cfg.train.seed = *args.seed;
  if (args.max_epochs) cfg.train.max_epochs = *args.max_epochs;
  cfg.Validate();

  const Corpus corpus = LoadCorpusOrDie(cfg);
  ResolveModelDims(&cfg, corpus);

  const std::string run_dir = cfg.output_dir + "/train_" + args.model_kind;
  fs::create_directories(run_dir);
  cfg.train.checkpoint_dir = run_dir;
  cfg.train.log_path = run_dir + "/train_log.jsonl";
  WriteResolvedConfig(cfg, run_dir);

  TrainResult result;
  if (args.model_kind == "cassnat") {
    CassNatModel model(cfg.model, corpus.vocab, cfg.train.seed);
    if (!args.init_encoder.empty()) {
      const int n = CopyEncoderParams(args.init_encoder, &model.store());
      std::cout << "initialized " << n << " encoder parameters from "
                << args.init_encoder << "\n";
    }
    Trainer trainer =
        MakeCassNatTrainer(&model, cfg.loss, cfg.train, cfg.schedule);
    result = trainer.Train(corpus, args.resume);
  } else {
    AtModel model(cfg.model, corpus.vocab, cfg.train.seed);
    if (!args.init_encoder.empty()) {
      const int n = CopyEncoderParams(args.init_encoder, &model.store());
      std::cout << "initialized " << n << " encoder parameters from "
                << args.init_encoder << "\n";
    }
    Trainer trainer =
        MakeAtTrainer(&model, cfg.loss, cfg.train, cfg.schedule);
    result = trainer.Train(corpus, args.resume);
  }

  std::cout << "trained " << args.model_kind << ": " << result.epochs_run
            << " epochs, " << result.steps << " steps, best dev WER "
            << std::fixed << std::setprecision(4) << result.best_dev_wer
            << ", final checkpoint " << result.final_checkpoint << "\n";
}

struct DecodeArgs {
  std::string config_path;
  std::string checkpoint;
  std::string scorer;
  std::string split = "dev";
  std::string baseline_summary;
  std::optional<std::string> method;
  std::optional<double> tau;
  std::optional<int> samples;
  std::optional<int> beam;
  std::optional<uint64_t> seed;
  std::optional<int> threads;
  bool score_collapsed = false;
};

double ReadBaselineMeanTime(const std::string& path) {
  if (!fs::exists(path)) {
    throw MissingInputError("baseline summary not found: " + path);
  }
  std::ifstream in(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("baseline summary is not valid JSON: " +
                      std::string(e.what()));
  }
  if (!j.contains("mean_time") || !j["mean_time"].is_number()) {
    throw ConfigError("baseline summary has no numeric mean_time: " + path);
  }
  return j["mean_time"].get<double>();
}

void RunDecode(const DecodeArgs& args) {
  ExperimentConfig cfg = LoadExperimentConfig(args.config_path);
  if (args.method) cfg.decode.method = *args.method;
  if (args.tau) cfg.decode.tau = *args.tau;
  if (args.samples) cfg.decode.num_samples = *args.samples;
  if (args.beam) cfg.decode.beam_width = *args.beam;
  if (args.seed) cfg.decode.seed = *args.seed;
  if (args.threads) cfg.decode.num_threads = *args.threads;
  if (args.score_collapsed) cfg.decode.score_collapsed = true;
  cfg.decode.Validate();

  const Corpus corpus = LoadCorpusOrDie(cfg);
  ResolveModelDims(&cfg, corpus);
  const std::vector<Utterance>& utts = corpus.split(args.split);

  const std::string& method = cfg.decode.method;
  const bool needs_model =
      method == "oracle" || method == "bpa" || method == "bsa" ||
      method == "esa";
  const bool needs_scorer =
      method == "esa" || method == "at_greedy" || method == "at_beam";

  std::optional<CassNatModel> model;
  if (needs_model) {
    if (args.checkpoint.empty()) {
      throw ConfigError("--checkpoint is required for method " + method);
    }
    model.emplace(cfg.model, corpus.vocab, cfg.train.seed);
    model->store().FromEntries(LoadCheckpoint(args.checkpoint));
  }
  std::optional<AtModel> scorer;
  if (!args.scorer.empty()) {
    scorer.emplace(cfg.model, corpus.vocab, cfg.train.seed);
    scorer->store().FromEntries(LoadCheckpoint(args.scorer));
  } else if (needs_scorer) {
    throw ConfigError("--scorer is required for method " + method);
  }

  const double baseline_mean =
      args.baseline_summary.empty()
          ? 0.0
          : ReadBaselineMeanTime(args.baseline_summary);

  const CorpusDecodeResult res = DecodeCorpus(
      model ? &*model : nullptr, scorer ? &*scorer : nullptr, utts,
      corpus.vocab, cfg.decode, baseline_mean);

  const std::string run_dir = cfg.output_dir + "/decode_" + method;
  fs::create_directories(run_dir);
  WriteResolvedConfig(cfg, run_dir);
  WriteResultsJsonl(run_dir + "/results.jsonl", res.results, utts);
  WriteSummaryJson(run_dir + "/summary.json", res.summary);

  const CorpusDecodeSummary& s = res.summary;
  std::cout << std::left << std::setw(10) << "method" << std::right
            << std::setw(9) << "wer" << std::setw(9) << "mr" << std::setw(9)
            << "lper" << std::setw(13) << "mean_time_s" << std::setw(9)
            << "speedup" << "\n";
  auto cell = [](double v) {
    if (!std::isfinite(v)) return std::string("-");
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << v;
    return os.str();
  };
  std::cout << std::left << std::setw(10) << method << std::right
            << std::setw(9) << cell(s.wer) << std::setw(9) << cell(s.mr)
            << std::setw(9) << cell(s.lper) << std::setw(13)
            << cell(s.mean_wall_time_s) << std::setw(9)
            << (s.speedup_vs_baseline > 0.0 ? cell(s.speedup_vs_baseline)
                                            : std::string("-"))
            << "\n";
  std::cout << "wrote " << run_dir << "/results.jsonl and summary.json ("
            << s.num_utterances << " utterances)\n";
}

struct AnalyzeArgs {
  std::string config_path;
  std::string results_path;
  std::string oracle_path;
  bool per_utterance = false;
};

std::vector<AlignedUtt> ReadAlignedJsonl(const std::string& path) {
  if (!fs::exists(path)) {
    throw MissingInputError("results file not found: " + path);
  }
  std::ifstream in(path);
  std::vector<AlignedUtt> utts;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        " is not valid JSON: " + e.what());
    }
    AlignedUtt u;
    u.utt_id = j.at("utt_id").get<std::string>();
    u.align = j.at("alignment").get<std::vector<int>>();
    if (j.contains("ref")) u.ref = j["ref"].get<std::vector<int>>();
    if (j.contains("hypothesis")) {
      u.hyp = j["hypothesis"].get<std::vector<int>>();
    }
    utts.push_back(std::move(u));
  }
  if (utts.empty()) {
    throw MissingInputError("no results in " + path);
  }
  return utts;
}

void RunAnalyze(const AnalyzeArgs& args) {
  ExperimentConfig cfg = LoadExperimentConfig(args.config_path);
  const std::vector<AlignedUtt> candidates =
      ReadAlignedJsonl(args.results_path);
  const std::vector<AlignedUtt> oracles = ReadAlignedJsonl(args.oracle_path);

  // Blank is always token id 0 by construction of the vocabulary.
  const AlignmentDiagnostics diag =
      ComputeAlignmentDiagnostics(candidates, oracles, 0,
                                  args.per_utterance);
  CorpusWer wer;
  for (const AlignedUtt& u : candidates) wer.Add(u.ref, u.hyp);

  const std::string run_dir = cfg.output_dir + "/analyze";
  fs::create_directories(run_dir);
  WriteResolvedConfig(cfg, run_dir);

  nlohmann::json report;
  report["wer"] = wer.rate();
  report["mr"] = diag.mr;
  report["lper"] = diag.lper;
  report["num_utterances"] = diag.num_utterances;
  report["per_utterance_mr"] = args.per_utterance;
  nlohmann::json buckets = nlohmann::json::array();
  for (const auto& [delta, stat] : diag.length_error_hist) {
    buckets.push_back({{"delta", delta},
                       {"count", stat.count},
                       {"wer", stat.wer()},
                       {"ref_tokens", stat.ref_tokens}});
  }
  report["length_error_buckets"] = buckets;
  {
    std::ofstream f(run_dir + "/report.json", std::ios::trunc);
    CheckContract(f.good(), "cannot write " + run_dir + "/report.json");
    f << report.dump(2) << "\n";
  }
  {
    std::ofstream csv(run_dir + "/length_error_hist.csv", std::ios::trunc);
    CheckContract(csv.good(), "cannot write the histogram CSV");
    csv << "delta,count,wer\n";
    for (const auto& [delta, stat] : diag.length_error_hist) {
      csv << delta << "," << stat.count << "," << std::setprecision(10)
          << stat.wer() << "\n";
    }
  }

  std::cout << "wer " << std::fixed << std::setprecision(4) << wer.rate()
            << "  mr " << diag.mr << "  lper " << diag.lper << "  ("
            << diag.num_utterances << " utterances, "
            << diag.length_error_hist.size() << " length-error buckets)\n"
            << "wrote " << run_dir << "/report.json and length_error_hist.csv\n";
}

struct DumpArgs {
  std::string config_path;
  std::string checkpoint;
  std::string level = "taee";
  std::string split = "train";
};

void RunDumpEmbeddings(const DumpArgs& args) {
  ExperimentConfig cfg = LoadExperimentConfig(args.config_path);
  const Corpus corpus = LoadCorpusOrDie(cfg);
  ResolveModelDims(&cfg, corpus);
  if (args.checkpoint.empty()) {
    throw ConfigError("--checkpoint is required");
  }
  CassNatModel model(cfg.model, corpus.vocab, cfg.train.seed);
  model.store().FromEntries(LoadCheckpoint(args.checkpoint));

  const std::vector<Utterance>& utts = corpus.split(args.split);
  const int d = cfg.model.d_model;
  std::map<int, std::vector<double>> sums;
  std::map<int, int> counts;
  for (int id = 0; id < corpus.vocab.size(); ++id) {
    if (id == corpus.vocab.blank_id) continue;
    sums[id] = std::vector<double>(d, 0.0);
    counts[id] = 0;
  }

  NoGradGuard guard;
  for (const Utterance& utt : utts) {
    const EncoderOutput enc = model.RunEncoder(FeatureTensor(utt), -1, {});
    std::vector<int> align;
    if (const auto forced =
            ViterbiAlign(enc.ctc_logits, utt.transcript, corpus.vocab)) {
      align = forced->ids;
    } else {
      align = BestPathAlign(enc.ctc_logits).ids;
    }
    const Tensor emb = model.DecoderEmbeddings(enc, align, args.level, {});
    const std::vector<int> tokens = Collapse(align, corpus.vocab.blank_id);
    CheckContract(emb.rows() == static_cast<int>(tokens.size()) + 1,
                  "embedding rows must follow the collapse-plus-EOS rule");
    for (int r = 0; r < emb.rows(); ++r) {
      const int token = r < static_cast<int>(tokens.size())
                            ? tokens[r]
                            : corpus.vocab.eos_id;
      for (int c = 0; c < d; ++c) sums[token][c] += emb.at2(r, c);
      ++counts[token];
    }
  }

  const std::string run_dir = cfg.output_dir + "/embeddings_" + args.level;
  fs::create_directories(run_dir);
  WriteResolvedConfig(cfg, run_dir);
  std::ofstream f(run_dir + "/embeddings.jsonl", std::ios::trunc);
  CheckContract(f.good(), "cannot write the embeddings file");
  for (const auto& [token, sum] : sums) {
    nlohmann::json line;
    line["token"] = token;
    line["text"] = corpus.vocab.tokens[token];
    line["level"] = args.level;
    line["count"] = counts[token];
    std::vector<double> mean(d, 0.0);
    if (counts[token] > 0) {
      for (int c = 0; c < d; ++c) mean[c] = sum[c] / counts[token];
    }
    line["vector"] = mean;
    f << line.dump() << "\n";
  }
  std::cout << "wrote " << run_dir << "/embeddings.jsonl (" << sums.size()
            << " tokens, dim " << d << ", split " << args.split << ")\n";
}

int Dispatch(int argc, char** argv) {
  CLI::App app{
      "cassnat: single-step non-autoregressive speech recognition "
      "at desk scale"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand(
      "synth", "Generate a synthetic corpus from corpus.spec");
  synth->add_option("-c,--config", synth_args.config_path, "Experiment JSON")
      ->required();
  synth->add_option("--out", synth_args.out_override,
                    "Corpus file to write (overrides corpus.path)");
  synth->add_flag("--force", synth_args.force,
                  "Overwrite an existing corpus file");

  TrainArgs train_args;
  CLI::App* train =
      app.add_subcommand("train", "Train the recognizer or the baseline");
  train->add_option("-c,--config", train_args.config_path, "Experiment JSON")
      ->required();
  train
      ->add_option("--model", train_args.model_kind,
                   "Which model to train: cassnat | at")
      ->required()
      ->check(CLI::IsMember({"cassnat", "at"}));
  train->add_option("--init-encoder", train_args.init_encoder,
                    "Warm-start encoder parameters from this checkpoint");
  train->add_flag("--resume", train_args.resume,
                  "Continue from the saved training state");
  train->add_option("--seed", train_args.seed, "Override train.seed");
  train->add_option("--max-epochs", train_args.max_epochs,
                    "Override train.max_epochs");

  DecodeArgs decode_args;
  CLI::App* decode =
      app.add_subcommand("decode", "Decode a corpus split and score it");
  decode->add_option("-c,--config", decode_args.config_path, "Experiment JSON")
      ->required();
  decode->add_option("--checkpoint", decode_args.checkpoint,
                     "Recognizer checkpoint (oracle/bpa/bsa/esa)");
  decode->add_option("--scorer", decode_args.scorer,
                     "Baseline checkpoint (scores esa; decodes at_*)");
  decode->add_option("--split", decode_args.split, "train | dev | test")
      ->check(CLI::IsMember({"train", "dev", "test"}));
  decode->add_option("--baseline", decode_args.baseline_summary,
                     "summary.json of a reference run for the speedup ratio");
  decode->add_option("--method", decode_args.method,
                     "oracle | bpa | bsa | esa | at_greedy | at_beam");
  decode->add_option("--tau", decode_args.tau,
                     "Sampling threshold on top-1 probabilities");
  decode->add_option("--samples", decode_args.samples,
                     "Alignment samples per utterance");
  decode->add_option("--beam", decode_args.beam, "Beam width");
  decode->add_option("--seed", decode_args.seed, "Sampling seed");
  decode->add_option("--threads", decode_args.threads,
                     "Utterance workers; 0 = all cores");
  decode->add_flag("--score-collapsed", decode_args.score_collapsed,
                   "Rank collapsed alignments instead of decoded hypotheses");

  AnalyzeArgs analyze_args;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "Alignment-quality report from decode results");
  analyze
      ->add_option("-c,--config", analyze_args.config_path, "Experiment JSON")
      ->required();
  analyze
      ->add_option("--results", analyze_args.results_path,
                   "results.jsonl of the run to analyze")
      ->required();
  analyze
      ->add_option("--oracle", analyze_args.oracle_path,
                   "results.jsonl of an oracle-method run (the reference "
                   "alignments)")
      ->required();
  analyze->add_flag("--per-utterance", analyze_args.per_utterance,
                    "Average per-utterance mismatch rates instead of pooling");

  DumpArgs dump_args;
  CLI::App* dump = app.add_subcommand(
      "dump-embeddings", "Average token-level decoder states over a split");
  dump->add_option("-c,--config", dump_args.config_path, "Experiment JSON")
      ->required();
  dump->add_option("--checkpoint", dump_args.checkpoint,
                   "Recognizer checkpoint")
      ->required();
  dump->add_option("--level", dump_args.level, "taee | sad | mad")
      ->check(CLI::IsMember({"taee", "sad", "mad"}));
  dump->add_option("--split", dump_args.split, "train | dev | test")
      ->check(CLI::IsMember({"train", "dev", "test"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (synth->parsed()) RunSynth(synth_args);
  if (train->parsed()) RunTrain(train_args);
  if (decode->parsed()) RunDecode(decode_args);
  if (analyze->parsed()) RunAnalyze(analyze_args);
  if (dump->parsed()) RunDumpEmbeddings(dump_args);
  return 0;
}

}  // namespace
}  // namespace cassnat

int main(int argc, char** argv) {
  try {
    return cassnat::Dispatch(argc, argv);
  } catch (const cassnat::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const cassnat::MissingInputError& e) {
    std::cerr << "missing input: " << e.what() << "\n";
    return 4;
  } catch (const cassnat::TrainAbortError& e) {
    std::cerr << "training aborted: " << e.what() << "\n";
    return 3;
  } catch (const cassnat::ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const cassnat::DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 3;
  }
}
