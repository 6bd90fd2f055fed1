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

#ifndef TONEPROBE_CORPUS_VIETNAMESE_H_
#define TONEPROBE_CORPUS_VIETNAMESE_H_

#include <string>
#include <string_view>
#include <utility>

namespace toneprobe::corpus {

struct VietnameseSyllable {
  std::string phoneme_string;  // segmental IPA, tone marker stripped
  int tone_id = 0;             // 1..8
};

// Parses an IPA syllable carrying an eight-tone marker as a trailing decimal
// digit ("tɔj5"). Throws Error when the marker is missing or outside 1..8.
VietnameseSyllable parse_vietnamese_ipa(std::string_view ipa_syllable_with_tone);

// Greedy longest-prefix split of a segmental IPA string into onset + rime,
// using the Hanoi Vietnamese onset inventory. Unknown-initial syllables get
// an empty onset; either way onset + rime reassembles the input exactly.
std::pair<std::string, std::string> split_vietnamese_onset(std::string_view segments);

}  // namespace toneprobe::corpus

#endif  // TONEPROBE_CORPUS_VIETNAMESE_H_
