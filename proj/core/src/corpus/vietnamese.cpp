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

#include "toneprobe/corpus/vietnamese.h"

#include <array>
#include <cctype>

#include "toneprobe/common/error.h"

namespace toneprobe::corpus {
namespace {

// Hanoi Vietnamese onsets as emitted by IPA phonetizers, longest first so a
// front-to-back scan is a maximal match. ASCII letters cover the plain stops
// and fricatives; the rest are multi-byte UTF-8.
constexpr std::array<std::string_view, 26> kOnsets = {
    "tʰ", "ɓ", "ɗ", "ʈ", "c", "k", "ʔ", "f", "v", "t", "s", "z", "ʂ",
    "ʐ",  "x", "ɣ", "h", "m", "n", "ɲ", "ŋ", "l", "p", "b", "d", "j",
};

}  // namespace

VietnameseSyllable parse_vietnamese_ipa(std::string_view ipa_syllable_with_tone) {
  size_t end = ipa_syllable_with_tone.size();
  size_t digits_begin = end;
  while (digits_begin > 0 &&
         std::isdigit(static_cast<unsigned char>(ipa_syllable_with_tone[digits_begin - 1]))) {
    --digits_begin;
  }
  if (digits_begin == end || digits_begin == 0) {
    throw Error("IPA syllable has no tone marker: '" + std::string(ipa_syllable_with_tone) + "'");
  }
  int tone = 0;
  for (size_t i = digits_begin; i < end; ++i) {
    tone = tone * 10 + (ipa_syllable_with_tone[i] - '0');
    if (tone > 8) break;
  }
  if (tone < 1 || tone > 8) {
    throw Error("tone marker outside the eight-tone scheme: '" +
                std::string(ipa_syllable_with_tone) + "'");
  }
  VietnameseSyllable out;
  out.phoneme_string = std::string(ipa_syllable_with_tone.substr(0, digits_begin));
  out.tone_id = tone;
  return out;
}

std::pair<std::string, std::string> split_vietnamese_onset(std::string_view segments) {
  for (std::string_view onset : kOnsets) {
    if (segments.size() > onset.size() && segments.substr(0, onset.size()) == onset) {
      return {std::string(onset), std::string(segments.substr(onset.size()))};
    }
  }
  return {std::string(), std::string(segments)};
}

}  // namespace toneprobe::corpus
