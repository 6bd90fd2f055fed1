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

#ifndef TONEPROBE_FIXTURE_FIXTURE_H_
#define TONEPROBE_FIXTURE_FIXTURE_H_

#include <cstdint>
#include <filesystem>
#include <string>

namespace toneprobe::fixture {

// Knobs for the bundled mini corpus. The defaults define *the* fixture the
// acceptance run uses; change them only together with the tests that pin
// its statistics.
struct FixtureOptions {
  uint64_t audio_seed = 2025;      // seeds the synthesis noise, not the run
  uint64_t run_seed = 11;          // seed written into the generated config
  int n_utterances = 20;
  int syllables_per_utterance = 6;
  int sample_rate = 16000;
};

struct FixtureInfo {
  std::filesystem::path root;
  std::filesystem::path config_file;
  int n_utterances = 0;
  int n_syllables = 0;  // transcript tokens, neutral-tone ones included
};

// Writes a complete synthetic Mandarin mini corpus under root:
//
//   wav/fix_*.wav     16 kHz mono PCM16, one per utterance
//   text              Kaldi-style transcript of numbered pinyin
//   alignments.tsv    4-column per-syllable alignment, silences marked
//   config.json       a ready-to-run declaration: four stub models and all
//                     four experiment families over this corpus
//
// Each syllable is synthesized as an onset cue (a noise band whose center
// frequency identifies the initial) followed by a harmonic rime whose F0
// follows the citation contour of its tone, so tone probes, consonant
// probes, and the F0 baseline all have real signal to find. Everything is
// deterministic in the options: the same options produce byte-identical
// trees.
FixtureInfo write_fixture(const std::filesystem::path& root,
                          const FixtureOptions& options = {});

}  // namespace toneprobe::fixture

#endif  // TONEPROBE_FIXTURE_FIXTURE_H_
