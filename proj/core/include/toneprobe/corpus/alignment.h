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

#ifndef TONEPROBE_CORPUS_ALIGNMENT_H_
#define TONEPROBE_CORPUS_ALIGNMENT_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace toneprobe::corpus {

struct AlignedInterval {
  double start_s = 0.0;
  double end_s = 0.0;
  std::string label;
};

// Aligner silence tokens, matched case-insensitively and with optional
// square brackets: "", "sil", "sp", "<eps>", "[SIL]", ...
bool is_silence_label(std::string_view label);

// Parses a Praat long-format TextGrid and returns the intervals of one tier:
// the first tier whose name contains "char", "word" or "syll"
// (case-insensitive), else the first interval tier.
std::vector<AlignedInterval> read_textgrid_intervals(const std::filesystem::path& path);

// Tab-separated alignments. Rows are either (start_s, end_s, label) or
// (utterance_id, start_s, end_s, label); four-column rows are filtered to
// `utterance_id`. Lines starting with '#' are skipped.
std::vector<AlignedInterval> read_tsv_intervals(const std::filesystem::path& path,
                                                std::string_view utterance_id);

// Dispatches on the file extension (.textgrid vs anything else = TSV).
std::vector<AlignedInterval> read_alignment(const std::filesystem::path& path,
                                            std::string_view utterance_id);

}  // namespace toneprobe::corpus

#endif  // TONEPROBE_CORPUS_ALIGNMENT_H_
