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

#ifndef CASSNAT_CTC_VOCAB_H_
#define CASSNAT_CTC_VOCAB_H_

#include <set>
#include <string>
#include <vector>

#include "cassnat/util/common.h"

namespace cassnat {

// Token inventory. Id 0 is the CTC blank and id 1 is EOS by construction;
// real tokens start at 2. Blank never appears in targets, EOS never appears
// in alignments.
struct Vocabulary {
  std::vector<std::string> tokens;
  int blank_id = 0;
  int eos_id = 1;

  int size() const { return static_cast<int>(tokens.size()); }

  int num_real_tokens() const { return size() - 2; }

  void Validate() const {
    CheckContract(blank_id != eos_id && blank_id < size() && eos_id < size(),
                  "vocabulary: blank/eos ids out of range");
    std::set<std::string> uniq(tokens.begin(), tokens.end());
    CheckContract(uniq.size() == tokens.size(),
                  "vocabulary: duplicate token strings");
  }

  // blank, eos, then `num_real` single-letter tokens starting at 'a'.
  static Vocabulary Chars(int num_real) {
    CheckContract(num_real >= 1 && num_real <= 26,
                  "vocabulary: char factory supports 1..26 tokens");
    Vocabulary v;
    v.tokens = {"<b>", "<eos>"};
    for (int i = 0; i < num_real; ++i) {
      v.tokens.push_back(std::string(1, static_cast<char>('a' + i)));
    }
    v.Validate();
    return v;
  }
};

}  // namespace cassnat

#endif  // CASSNAT_CTC_VOCAB_H_
