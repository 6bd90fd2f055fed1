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

#ifndef TONEPROBE_CORPUS_CORPUS_H_
#define TONEPROBE_CORPUS_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "toneprobe/corpus/types.h"

namespace toneprobe::corpus {

// Declarative description of where a corpus lives on disk; resolved into a
// CorpusManifest by resolve_manifest().
struct ManifestSpec {
  std::string corpus_id;
  Language language = Language::kMandarin;
  std::filesystem::path audio_root;

  enum class TranscriptKind {
    kKaldiText,   // one file, lines "utterance_id tok tok ..."
    kThchs30Trn,  // per-wav .trn files: line 1 characters, line 2 numbered pinyin
  };
  TranscriptKind transcript_kind = TranscriptKind::kKaldiText;
  std::filesystem::path transcript_path;  // file (kaldi) or ignored (trn, uses audio_root)

  enum class AlignmentKind {
    kDir,      // alignment_path/<utterance_id>.{TextGrid,tsv,txt}
    kTsvFile,  // one 4-column TSV holding every utterance
  };
  AlignmentKind alignment_kind = AlignmentKind::kDir;
  std::filesystem::path alignment_path;

  int sample_rate = 16000;
};

// Walks the corpus layout and pairs every utterance with exactly one audio
// file and one alignment entry. Utterances missing either are dropped with a
// warning count; duplicate utterance ids are a hard error. The result is
// sorted by utterance_id.
CorpusManifest resolve_manifest(const ManifestSpec& spec);

// Every transcript token ends up either as an emitted syllable or in one of
// the skip counters; reconciles() checks that the totals add up exactly.
struct IngestStats {
  int64_t utterances_total = 0;
  int64_t utterances_loaded = 0;
  int64_t utterances_skipped_mismatch = 0;
  int64_t utterances_skipped_unreadable = 0;
  int64_t utterances_skipped_parse_error = 0;

  int64_t transcript_tokens_total = 0;
  int64_t syllables_emitted = 0;
  int64_t tokens_in_skipped_utterances = 0;
  int64_t silence_intervals_dropped = 0;
  int64_t neutral_tone_removed = 0;

  std::vector<std::string> skip_reports;  // capped at kMaxSkipReports

  static constexpr size_t kMaxSkipReports = 50;

  bool reconciles() const {
    return transcript_tokens_total == syllables_emitted + tokens_in_skipped_utterances;
  }
  void note_skip(std::string report);
  std::string summary() const;
};

struct LoadResult {
  std::vector<AlignedSyllable> syllables;
  IngestStats stats;
};

// Ingests transcripts + forced alignments into AlignedSyllables. Silence
// intervals are dropped; utterances whose speech-interval count does not
// match the transcript token count are skipped and counted. Throws Error
// when the mismatch rate exceeds kMaxMismatchRate (wrong aligner output).
inline constexpr double kMaxMismatchRate = 0.05;
LoadResult load_corpus(const CorpusManifest& manifest);

// Keeps Mandarin tones 1..4, drops tone 5, records the removal count.
// Non-Mandarin syllables pass through untouched.
std::vector<AlignedSyllable> filter_neutral_tone(std::vector<AlignedSyllable> syllables,
                                                 IngestStats* stats);

// Syllable table TSV: columns (utterance_id, start_s, end_s, surface,
// phoneme_string, tone, onset, rime), seconds as 6-decimal fixed point.
void write_syllable_table(const std::filesystem::path& path,
                          const std::vector<AlignedSyllable>& syllables);
std::vector<AlignedSyllable> read_syllable_table(const std::filesystem::path& path,
                                                 Language language);

}  // namespace toneprobe::corpus

#endif  // TONEPROBE_CORPUS_CORPUS_H_
