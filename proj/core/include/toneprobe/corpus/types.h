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

#ifndef TONEPROBE_CORPUS_TYPES_H_
#define TONEPROBE_CORPUS_TYPES_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace toneprobe::corpus {

enum class Language { kMandarin, kEnglish, kVietnamese, kCantonese, kFrench, kOther };

std::string_view language_name(Language lang);
Language parse_language(std::string_view name);  // throws on unknown name

// Number of tone classes a probing task over this language has after
// filtering: Mandarin T1-T4, Vietnamese tones 1-8.
int tone_class_count(Language lang);

struct ToneLabel {
  Language language = Language::kMandarin;
  int tone_id = 0;  // Mandarin 1..5 at ingest, 1..4 after neutral-tone filtering; Vietnamese 1..8
};

// One tone-bearing unit: a Mandarin character syllable or a Vietnamese
// syllable, located in time by forced alignment.
struct AlignedSyllable {
  std::string utterance_id;
  double start_s = 0.0;
  double end_s = 0.0;
  std::string surface;         // character or orthographic syllable
  std::string phoneme_string;  // toneless pinyin base / toneless IPA
  ToneLabel tone;
  std::string onset;  // maximal initial consonant, may be empty
  std::string rime;   // remainder: nucleus + coda

  double mid_s() const { return 0.5 * (start_s + end_s); }
};

struct UtteranceEntry {
  std::string utterance_id;
  std::filesystem::path audio_path;
  std::vector<std::string> transcript_tokens;  // numbered pinyin / IPA+tone
  std::vector<std::string> surface_tokens;     // optional, same length as transcript_tokens
  std::filesystem::path alignment_path;
};

struct CorpusManifest {
  std::string corpus_id;
  Language language = Language::kMandarin;
  std::filesystem::path audio_root;
  int sample_rate = 16000;
  std::vector<UtteranceEntry> utterances;  // sorted by utterance_id, ids unique
};

}  // namespace toneprobe::corpus

#endif  // TONEPROBE_CORPUS_TYPES_H_
