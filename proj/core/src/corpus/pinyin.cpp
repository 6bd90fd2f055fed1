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

#include "toneprobe/corpus/pinyin.h"

#include <array>

#include "toneprobe/common/error.h"

namespace toneprobe::corpus {
namespace {

// Digraphs listed ahead of their single-letter prefixes (zh before z, ...) so
// the first match is the maximal one.
constexpr std::array<std::string_view, 21> kInitials = {
    "zh", "ch", "sh", "b", "p", "m", "f", "d", "t", "n", "l",
    "g",  "k",  "h",  "j", "q", "x", "r", "z", "c", "s",
};

bool is_base_char(char c) {
  // THCHS-30 writes u-umlaut as 'v' (lv4, nv3), so plain a-z covers the
  // whole inventory.
  return c >= 'a' && c <= 'z';
}

}  // namespace

std::span<const std::string_view> mandarin_initials() {
  return {kInitials.data(), kInitials.size()};
}

PinyinSyllable parse_pinyin(std::string_view numbered_syllable) {
  if (numbered_syllable.size() < 2) {
    throw Error("malformed pinyin syllable: '" + std::string(numbered_syllable) + "'");
  }
  char last = numbered_syllable.back();
  if (last < '1' || last > '5') {
    throw Error("pinyin syllable has no trailing tone digit 1-5: '" +
                std::string(numbered_syllable) + "'");
  }
  std::string_view base = numbered_syllable.substr(0, numbered_syllable.size() - 1);
  for (char c : base) {
    if (!is_base_char(c)) {
      throw Error("pinyin syllable has unknown character: '" +
                  std::string(numbered_syllable) + "'");
    }
  }

  PinyinSyllable out;
  out.phoneme_string = std::string(base);
  out.tone_digit = last - '0';
  for (std::string_view initial : kInitials) {
    if (base.size() > initial.size() && base.substr(0, initial.size()) == initial) {
      out.onset = std::string(initial);
      out.rime = std::string(base.substr(initial.size()));
      return out;
    }
  }
  // No initial matched, or the match would leave an empty rime (bare "m",
  // "n" interjections): zero onset, the whole base is the rime.
  out.onset.clear();
  out.rime = out.phoneme_string;
  return out;
}

}  // namespace toneprobe::corpus
