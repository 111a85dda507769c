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

#include "cassnat/data/corpus.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cassnat/util/common.h"
#include "cassnat/util/io.h"
#include "cassnat/util/rng.h"

namespace cassnat {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'C', 'N', 'C', '1'};

// Salt keeping the prototype stream independent of per-utterance streams.
constexpr uint64_t kProtoSalt = 0x50524F544FULL;

double QuantizeF32(double v) { return static_cast<double>(static_cast<float>(v)); }

int SubsampledLength(int t) {
  const int t1 = (t + 1) / 2;
  return (t1 + 1) / 2;
}

int AdjacentRepeats(const std::vector<int>& ids) {
  int r = 0;
  for (size_t i = 1; i < ids.size(); ++i) {
    if (ids[i] == ids[i - 1]) ++r;
  }
  return r;
}

json SpecToJson(const SynthSpec& s) {
  return json{{"vocab_size", s.vocab_size},
              {"feat_dim", s.feat_dim},
              {"min_duration", s.min_duration},
              {"max_duration", s.max_duration},
              {"min_length", s.min_length},
              {"max_length", s.max_length},
              {"num_train", s.num_train},
              {"num_dev", s.num_dev},
              {"num_test", s.num_test},
              {"noise_sigma", s.noise_sigma},
              {"seed", s.seed}};
}

SynthSpec SpecFromJson(const json& j) {
  SynthSpec s;
  s.vocab_size = j.at("vocab_size").get<int>();
  s.feat_dim = j.at("feat_dim").get<int>();
  s.min_duration = j.at("min_duration").get<int>();
  s.max_duration = j.at("max_duration").get<int>();
  s.min_length = j.at("min_length").get<int>();
  s.max_length = j.at("max_length").get<int>();
  s.num_train = j.at("num_train").get<int>();
  s.num_dev = j.at("num_dev").get<int>();
  s.num_test = j.at("num_test").get<int>();
  s.noise_sigma = j.at("noise_sigma").get<double>();
  s.seed = j.at("seed").get<uint64_t>();
  return s;
}

Utterance SynthesizeUtterance(const SynthSpec& spec,
                              const std::vector<double>& prototypes,
                              const std::string& utt_id, Rng* rng) {
  Utterance utt;
  utt.utt_id = utt_id;
  utt.feat_dim = spec.feat_dim;
  // Resample until the CTC path space is nonempty after 4x subsampling.
  while (true) {
    const int u = rng->UniformInt(spec.min_length, spec.max_length);
    std::vector<int> tokens(u);
    std::vector<int> durations(u);
    int total = 0;
    for (int i = 0; i < u; ++i) {
      tokens[i] = 2 + rng->UniformInt(0, spec.vocab_size - 1);
      durations[i] = rng->UniformInt(spec.min_duration, spec.max_duration);
      total += durations[i];
    }
    if (SubsampledLength(total) < u + AdjacentRepeats(tokens)) continue;
    utt.transcript = tokens;
    utt.num_frames = total;
    utt.features.resize(static_cast<size_t>(total) * spec.feat_dim);
    size_t pos = 0;
    for (int i = 0; i < u; ++i) {
      const double* proto =
          prototypes.data() + static_cast<size_t>(tokens[i] - 2) * spec.feat_dim;
      for (int f = 0; f < durations[i]; ++f) {
        for (int d = 0; d < spec.feat_dim; ++d) {
          utt.features[pos++] =
              QuantizeF32(proto[d] + spec.noise_sigma * rng->Normal());
        }
      }
    }
    return utt;
  }
}

void WriteRecord(std::ostream& os, const Utterance& utt, uint32_t split_idx) {
  WriteString(os, utt.utt_id);
  WriteU32(os, split_idx);
  WriteU32(os, static_cast<uint32_t>(utt.num_frames));
  WriteU32(os, static_cast<uint32_t>(utt.feat_dim));
  WriteU32(os, static_cast<uint32_t>(utt.transcript.size()));
  for (int id : utt.transcript) WriteU32(os, static_cast<uint32_t>(id));
  for (double v : utt.features) WriteF32(os, static_cast<float>(v));
}

Utterance ReadRecord(std::istream& is, uint32_t* split_idx) {
  Utterance utt;
  utt.utt_id = ReadString(is);
  *split_idx = ReadU32(is);
  utt.num_frames = static_cast<int>(ReadU32(is));
  utt.feat_dim = static_cast<int>(ReadU32(is));
  const uint32_t u = ReadU32(is);
  utt.transcript.resize(u);
  for (uint32_t i = 0; i < u; ++i) utt.transcript[i] = static_cast<int>(ReadU32(is));
  const size_t n = static_cast<size_t>(utt.num_frames) * utt.feat_dim;
  utt.features.resize(n);
  for (size_t i = 0; i < n; ++i) utt.features[i] = static_cast<double>(ReadF32(is));
  return utt;
}

}  // namespace

void SynthSpec::Validate() const {
  CheckContract(vocab_size >= 1 && vocab_size <= 26,
                "SynthSpec: vocab_size must be in [1, 26]");
  CheckContract(feat_dim >= 1, "SynthSpec: feat_dim must be positive");
  CheckContract(min_duration >= 1 && max_duration >= min_duration,
                "SynthSpec: bad duration range");
  CheckContract(min_length >= 1 && max_length >= min_length,
                "SynthSpec: bad length range");
  CheckContract(num_train >= 1 && num_dev >= 0 && num_test >= 0,
                "SynthSpec: bad split sizes");
  CheckContract(noise_sigma >= 0.0, "SynthSpec: noise_sigma must be >= 0");
}

const std::vector<Utterance>& Corpus::split(const std::string& name) const {
  if (name == "train") return train;
  if (name == "dev") return dev;
  if (name == "test") return test;
  throw ContractError("Corpus: unknown split " + name);
}

std::vector<double> TokenPrototypes(const SynthSpec& spec) {
  Rng rng(Rng::Mix(spec.seed, kProtoSalt));
  std::vector<double> protos(static_cast<size_t>(spec.vocab_size) * spec.feat_dim);
  for (double& v : protos) v = QuantizeF32(rng.Normal());
  return protos;
}

Corpus Synthesize(const SynthSpec& spec) {
  spec.Validate();
  Corpus corpus;
  corpus.spec = spec;
  corpus.vocab = Vocabulary::Chars(spec.vocab_size);
  const std::vector<double> protos = TokenPrototypes(spec);

  // Prototypes must be pairwise distinct for nearest-prototype decoding.
  std::set<std::vector<double>> unique_rows;
  for (int i = 0; i < spec.vocab_size; ++i) {
    unique_rows.insert(std::vector<double>(
        protos.begin() + static_cast<size_t>(i) * spec.feat_dim,
        protos.begin() + static_cast<size_t>(i + 1) * spec.feat_dim));
  }
  CheckContract(static_cast<int>(unique_rows.size()) == spec.vocab_size,
                "Synthesize: prototype collision");

  const char* names[3] = {"train", "dev", "test"};
  const int counts[3] = {spec.num_train, spec.num_dev, spec.num_test};
  std::vector<Utterance>* splits[3] = {&corpus.train, &corpus.dev, &corpus.test};
  for (int s = 0; s < 3; ++s) {
    for (int i = 0; i < counts[s]; ++i) {
      char id[32];
      std::snprintf(id, sizeof(id), "%s-%04d", names[s], i);
      Rng rng(Rng::Mix(spec.seed, (static_cast<uint64_t>(s + 1) << 32) |
                                      static_cast<uint64_t>(i)));
      splits[s]->push_back(SynthesizeUtterance(spec, protos, id, &rng));
    }
  }

  // Global train-split statistics, used for normalization at load time.
  corpus.feat_mean.assign(spec.feat_dim, 0.0);
  corpus.feat_var.assign(spec.feat_dim, 0.0);
  int64_t frames = 0;
  for (const Utterance& utt : corpus.train) {
    frames += utt.num_frames;
    for (int t = 0; t < utt.num_frames; ++t) {
      for (int d = 0; d < spec.feat_dim; ++d) {
        corpus.feat_mean[d] += utt.features[static_cast<size_t>(t) * spec.feat_dim + d];
      }
    }
  }
  for (double& m : corpus.feat_mean) m /= static_cast<double>(frames);
  for (const Utterance& utt : corpus.train) {
    for (int t = 0; t < utt.num_frames; ++t) {
      for (int d = 0; d < spec.feat_dim; ++d) {
        const double delta =
            utt.features[static_cast<size_t>(t) * spec.feat_dim + d] -
            corpus.feat_mean[d];
        corpus.feat_var[d] += delta * delta;
      }
    }
  }
  for (double& v : corpus.feat_var) v /= static_cast<double>(frames);
  return corpus;
}

void SaveCorpus(const Corpus& corpus, const std::string& path) {
  json header;
  header["spec"] = SpecToJson(corpus.spec);
  header["vocab"] = corpus.vocab.tokens;
  header["feat_mean"] = corpus.feat_mean;
  header["feat_var"] = corpus.feat_var;
  header["splits"] = {{"train", corpus.train.size()},
                      {"dev", corpus.dev.size()},
                      {"test", corpus.test.size()}};

  // Records serialized first so the index can be emitted up front.
  std::vector<std::string> buffers;
  const std::vector<Utterance>* splits[3] = {&corpus.train, &corpus.dev,
                                             &corpus.test};
  for (int s = 0; s < 3; ++s) {
    for (const Utterance& utt : *splits[s]) {
      std::ostringstream buf(std::ios::binary);
      WriteRecord(buf, utt, static_cast<uint32_t>(s));
      buffers.push_back(buf.str());
    }
  }

  std::ofstream os(path, std::ios::binary);
  CheckContract(os.good(), "SaveCorpus: cannot open " + path);
  os.write(kMagic, 4);
  WriteString(os, header.dump());
  WriteU32(os, static_cast<uint32_t>(buffers.size()));
  uint64_t offset = 0;
  for (const std::string& buf : buffers) {
    WriteU64(os, offset);
    offset += buf.size();
  }
  for (const std::string& buf : buffers) os.write(buf.data(), buf.size());
  CheckContract(os.good(), "SaveCorpus: write failed for " + path);
}

Corpus LoadCorpus(const std::string& path, bool normalize) {
  if (!std::filesystem::exists(path)) {
    throw MissingInputError("LoadCorpus: no such file: " + path);
  }
  std::ifstream is(path, std::ios::binary);
  CheckContract(is.good(), "LoadCorpus: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  CheckContract(is.good() && std::equal(magic, magic + 4, kMagic),
                "LoadCorpus: bad magic in " + path);

  const json header = json::parse(ReadString(is));
  Corpus corpus;
  corpus.spec = SpecFromJson(header.at("spec"));
  corpus.vocab.tokens = header.at("vocab").get<std::vector<std::string>>();
  corpus.vocab.Validate();
  corpus.feat_mean = header.at("feat_mean").get<std::vector<double>>();
  corpus.feat_var = header.at("feat_var").get<std::vector<double>>();

  const uint32_t num_records = ReadU32(is);
  std::vector<uint64_t> offsets(num_records);
  for (uint64_t& o : offsets) o = ReadU64(is);
  uint64_t pos = 0;
  for (uint32_t r = 0; r < num_records; ++r) {
    CheckContract(offsets[r] == pos, "LoadCorpus: index mismatch");
    const std::streampos before = is.tellg();
    uint32_t split_idx = 0;
    Utterance utt = ReadRecord(is, &split_idx);
    CheckContract(is.good(), "LoadCorpus: truncated record");
    CheckContract(split_idx < 3, "LoadCorpus: bad split index");
    pos += static_cast<uint64_t>(is.tellg() - before);
    if (split_idx == 0) corpus.train.push_back(std::move(utt));
    else if (split_idx == 1) corpus.dev.push_back(std::move(utt));
    else corpus.test.push_back(std::move(utt));
  }
  CheckContract(corpus.train.size() == header.at("splits").at("train").get<size_t>() &&
                    corpus.dev.size() == header.at("splits").at("dev").get<size_t>() &&
                    corpus.test.size() == header.at("splits").at("test").get<size_t>(),
                "LoadCorpus: split sizes disagree with header");

  if (normalize) NormalizeInPlace(&corpus);
  return corpus;
}

void NormalizeInPlace(Corpus* corpus) {
  const int f = corpus->spec.feat_dim;
  CheckContract(corpus->feat_mean.size() == static_cast<size_t>(f) &&
                    corpus->feat_var.size() == static_cast<size_t>(f),
                "NormalizeInPlace: corpus carries no train statistics");
  std::vector<double> inv_std(f);
  for (int d = 0; d < f; ++d) {
    inv_std[d] = 1.0 / std::sqrt(corpus->feat_var[d] + 1e-8);
  }
  for (std::vector<Utterance>* split :
       {&corpus->train, &corpus->dev, &corpus->test}) {
    for (Utterance& utt : *split) {
      for (int t = 0; t < utt.num_frames; ++t) {
        for (int d = 0; d < f; ++d) {
          double& v = utt.features[static_cast<size_t>(t) * f + d];
          v = (v - corpus->feat_mean[d]) * inv_std[d];
        }
      }
    }
  }
}

}  // namespace cassnat
