// Copyright 2025 The toneprobe Authors
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

#ifndef TONEPROBE_CORPUS_PINYIN_H_
#define TONEPROBE_CORPUS_PINYIN_H_

#include <span>
#include <string>
#include <string_view>

namespace toneprobe::corpus {

struct PinyinSyllable {
  std::string phoneme_string;  // toneless base, e.g. "hao"
  int tone_digit = 0;          // 1..5, the citation (base-form) tone digit
  std::string onset;           // maximal initial from the Mandarin inventory, may be empty
  std::string rime;            // remainder, onset + rime == phoneme_string
};

// The 21 Mandarin initials. Digraphs first so a maximal match is a simple
// front-to-back scan.
std::span<const std::string_view> mandarin_initials();

// Parses a numbered-pinyin syllable ("hao3", "zhong1", "lv4"). The trailing
// digit is the base-form tone; sandhi is never applied here. Throws Error on
// malformed input, naming the offending token.
PinyinSyllable parse_pinyin(std::string_view numbered_syllable);

}  // namespace toneprobe::corpus

#endif  // TONEPROBE_CORPUS_PINYIN_H_
