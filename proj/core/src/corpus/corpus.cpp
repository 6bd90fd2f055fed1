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

#include "toneprobe/corpus/corpus.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "toneprobe/common/error.h"
#include "toneprobe/common/log.h"
#include "toneprobe/common/strings.h"
#include "toneprobe/corpus/alignment.h"
#include "toneprobe/corpus/pinyin.h"
#include "toneprobe/corpus/vietnamese.h"

namespace toneprobe::corpus {

namespace fs = std::filesystem;
using strings::strf;
using strings::trim;

std::string_view language_name(Language lang) {
  switch (lang) {
    case Language::kMandarin: return "mandarin";
    case Language::kEnglish: return "english";
    case Language::kVietnamese: return "vietnamese";
    case Language::kCantonese: return "cantonese";
    case Language::kFrench: return "french";
    case Language::kOther: return "other";
  }
  return "other";
}

Language parse_language(std::string_view name) {
  std::string low = strings::lower(name);
  if (low == "mandarin") return Language::kMandarin;
  if (low == "english") return Language::kEnglish;
  if (low == "vietnamese") return Language::kVietnamese;
  if (low == "cantonese") return Language::kCantonese;
  if (low == "french") return Language::kFrench;
  if (low == "other") return Language::kOther;
  throw Error("unknown language: '" + std::string(name) + "'");
}

int tone_class_count(Language lang) {
  switch (lang) {
    case Language::kMandarin: return 4;
    case Language::kVietnamese: return 8;
    case Language::kCantonese: return 6;
    default: return 0;
  }
}

namespace {

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

fs::path find_alignment_file(const fs::path& dir, const std::string& utterance_id) {
  static constexpr std::string_view kExtensions[] = {".TextGrid", ".textgrid", ".tsv", ".txt"};
  for (std::string_view ext : kExtensions) {
    fs::path candidate = dir / (utterance_id + std::string(ext));
    if (fs::exists(candidate)) return candidate;
  }
  return {};
}

// One THCHS-30 .trn: line 1 characters, line 2 numbered pinyin, line 3
// phones. Files under train/dev/test hold a single relative path into data/.
void read_thchs30_trn(const fs::path& trn_path, UtteranceEntry* entry) {
  std::vector<std::string> lines = read_lines(trn_path);
  if (lines.size() == 1 && !lines[0].empty()) {
    fs::path redirect = trn_path.parent_path() / trim(lines[0]);
    lines = read_lines(redirect);
  }
  if (lines.size() < 2) {
    throw Error("malformed .trn file (need characters + pinyin lines): " + trn_path.string());
  }
  entry->transcript_tokens = strings::split_ws(lines[1]);
  // Line 1 has word-level spacing; split to characters and keep them as
  // surfaces only when the count matches the pinyin tokens.
  std::string hanzi;
  for (const std::string& word : strings::split_ws(lines[0])) hanzi += word;
  std::vector<std::string> chars = strings::utf8_chars(hanzi);
  if (chars.size() == entry->transcript_tokens.size()) {
    entry->surface_tokens = std::move(chars);
  }
}

}  // namespace

CorpusManifest resolve_manifest(const ManifestSpec& spec) {
  if (!fs::exists(spec.audio_root)) {
    throw Error("audio_root does not exist: " + spec.audio_root.string());
  }

  CorpusManifest manifest;
  manifest.corpus_id = spec.corpus_id;
  manifest.language = spec.language;
  manifest.audio_root = spec.audio_root;
  manifest.sample_rate = spec.sample_rate;

  std::map<std::string, UtteranceEntry> entries;

  if (spec.transcript_kind == ManifestSpec::TranscriptKind::kKaldiText) {
    for (const std::string& line : read_lines(spec.transcript_path)) {
      if (trim(line).empty()) continue;
      std::vector<std::string> fields = strings::split_ws(line);
      if (fields.size() < 2) continue;
      UtteranceEntry entry;
      entry.utterance_id = fields[0];
      entry.transcript_tokens.assign(fields.begin() + 1, fields.end());
      entry.audio_path = spec.audio_root / (entry.utterance_id + ".wav");
      if (!entries.emplace(entry.utterance_id, std::move(entry)).second) {
        throw Error("duplicate utterance_id in transcript: " + fields[0]);
      }
    }
  } else {
    for (const fs::directory_entry& de : fs::recursive_directory_iterator(spec.audio_root)) {
      if (!de.is_regular_file() || de.path().extension() != ".wav") continue;
      fs::path trn = de.path();
      trn += ".trn";
      if (!fs::exists(trn)) continue;
      UtteranceEntry entry;
      entry.utterance_id = de.path().stem().string();
      entry.audio_path = de.path();
      read_thchs30_trn(trn, &entry);
      if (!entries.emplace(entry.utterance_id, std::move(entry)).second) {
        // train/ and data/ list the same recordings; first hit wins.
        continue;
      }
    }
  }

  int64_t missing_audio = 0;
  int64_t missing_alignment = 0;
  for (auto& [id, entry] : entries) {
    if (!fs::exists(entry.audio_path)) {
      ++missing_audio;
      continue;
    }
    if (spec.alignment_kind == ManifestSpec::AlignmentKind::kTsvFile) {
      entry.alignment_path = spec.alignment_path;
    } else {
      entry.alignment_path = find_alignment_file(spec.alignment_path, id);
      if (entry.alignment_path.empty()) {
        ++missing_alignment;
        continue;
      }
    }
    manifest.utterances.push_back(std::move(entry));
  }
  if (missing_audio > 0) {
    log_warn("corpus %s: %lld utterances dropped, audio file missing", spec.corpus_id.c_str(),
             static_cast<long long>(missing_audio));
  }
  if (missing_alignment > 0) {
    log_warn("corpus %s: %lld utterances dropped, no alignment file", spec.corpus_id.c_str(),
             static_cast<long long>(missing_alignment));
  }
  if (manifest.utterances.empty()) {
    throw Error("corpus " + spec.corpus_id + " resolved to zero usable utterances");
  }
  // std::map iteration already sorted by id; keep the invariant explicit.
  std::sort(manifest.utterances.begin(), manifest.utterances.end(),
            [](const UtteranceEntry& a, const UtteranceEntry& b) {
              return a.utterance_id < b.utterance_id;
            });
  return manifest;
}

void IngestStats::note_skip(std::string report) {
  if (skip_reports.size() < kMaxSkipReports) skip_reports.push_back(std::move(report));
}

std::string IngestStats::summary() const {
  return strf(
      "utterances: %lld loaded / %lld total (%lld mismatch, %lld unreadable, %lld parse "
      "errors); tokens: %lld emitted + %lld skipped of %lld; silence intervals dropped: "
      "%lld; neutral tone removed: %lld",
      static_cast<long long>(utterances_loaded), static_cast<long long>(utterances_total),
      static_cast<long long>(utterances_skipped_mismatch),
      static_cast<long long>(utterances_skipped_unreadable),
      static_cast<long long>(utterances_skipped_parse_error),
      static_cast<long long>(syllables_emitted),
      static_cast<long long>(tokens_in_skipped_utterances),
      static_cast<long long>(transcript_tokens_total),
      static_cast<long long>(silence_intervals_dropped),
      static_cast<long long>(neutral_tone_removed));
}

LoadResult load_corpus(const CorpusManifest& manifest) {
  LoadResult result;
  IngestStats& stats = result.stats;
  stats.utterances_total = static_cast<int64_t>(manifest.utterances.size());

  for (const UtteranceEntry& utt : manifest.utterances) {
    const int64_t n_tokens = static_cast<int64_t>(utt.transcript_tokens.size());
    stats.transcript_tokens_total += n_tokens;

    std::vector<AlignedInterval> intervals;
    try {
      intervals = read_alignment(utt.alignment_path, utt.utterance_id);
    } catch (const Error& e) {
      ++stats.utterances_skipped_unreadable;
      stats.tokens_in_skipped_utterances += n_tokens;
      stats.note_skip(strf("%s: unreadable alignment: %s", utt.utterance_id.c_str(), e.what()));
      continue;
    }

    std::vector<AlignedInterval> speech;
    speech.reserve(intervals.size());
    for (AlignedInterval& iv : intervals) {
      if (is_silence_label(iv.label)) {
        ++stats.silence_intervals_dropped;
      } else {
        speech.push_back(std::move(iv));
      }
    }

    bool well_formed = static_cast<int64_t>(speech.size()) == n_tokens && n_tokens > 0;
    for (size_t i = 0; well_formed && i < speech.size(); ++i) {
      if (speech[i].end_s <= speech[i].start_s || speech[i].start_s < 0.0) well_formed = false;
      if (i > 0 && speech[i].start_s < speech[i - 1].end_s - 1e-9) well_formed = false;
    }
    if (!well_formed) {
      ++stats.utterances_skipped_mismatch;
      stats.tokens_in_skipped_utterances += n_tokens;
      stats.note_skip(strf("%s: %zu speech intervals vs %lld transcript tokens",
                           utt.utterance_id.c_str(), speech.size(),
                           static_cast<long long>(n_tokens)));
      continue;
    }

    std::vector<AlignedSyllable> parsed;
    parsed.reserve(speech.size());
    bool parse_failed = false;
    for (size_t i = 0; i < speech.size(); ++i) {
      const std::string& token = utt.transcript_tokens[i];
      AlignedSyllable syl;
      syl.utterance_id = utt.utterance_id;
      syl.start_s = speech[i].start_s;
      syl.end_s = speech[i].end_s;
      syl.surface = i < utt.surface_tokens.size() ? utt.surface_tokens[i] : token;
      syl.tone.language = manifest.language;
      try {
        if (manifest.language == Language::kVietnamese) {
          VietnameseSyllable v = parse_vietnamese_ipa(token);
          syl.phoneme_string = v.phoneme_string;
          syl.tone.tone_id = v.tone_id;
          std::tie(syl.onset, syl.rime) = split_vietnamese_onset(v.phoneme_string);
        } else {
          PinyinSyllable p = parse_pinyin(token);
          syl.phoneme_string = p.phoneme_string;
          syl.tone.tone_id = p.tone_digit;
          syl.onset = p.onset;
          syl.rime = p.rime;
        }
      } catch (const Error& e) {
        stats.note_skip(strf("%s: token %zu: %s", utt.utterance_id.c_str(), i, e.what()));
        parse_failed = true;
        break;
      }
      parsed.push_back(std::move(syl));
    }
    if (parse_failed) {
      ++stats.utterances_skipped_parse_error;
      stats.tokens_in_skipped_utterances += n_tokens;
      continue;
    }

    ++stats.utterances_loaded;
    stats.syllables_emitted += static_cast<int64_t>(parsed.size());
    for (AlignedSyllable& syl : parsed) result.syllables.push_back(std::move(syl));
  }

  if (stats.utterances_total > 0) {
    double mismatch_rate = static_cast<double>(stats.utterances_skipped_mismatch) /
                           static_cast<double>(stats.utterances_total);
    if (mismatch_rate > kMaxMismatchRate) {
      throw Error(strf(
          "alignment/transcript mismatch rate %.1f%% exceeds %.0f%%; wrong aligner output? (%s)",
          100.0 * mismatch_rate, 100.0 * kMaxMismatchRate, stats.summary().c_str()));
    }
  }
  return result;
}

std::vector<AlignedSyllable> filter_neutral_tone(std::vector<AlignedSyllable> syllables,
                                                 IngestStats* stats) {
  std::vector<AlignedSyllable> out;
  out.reserve(syllables.size());
  int64_t removed = 0;
  for (AlignedSyllable& syl : syllables) {
    if (syl.tone.language == Language::kMandarin && syl.tone.tone_id == 5) {
      ++removed;
    } else {
      out.push_back(std::move(syl));
    }
  }
  if (stats != nullptr) stats->neutral_tone_removed += removed;
  return out;
}

void write_syllable_table(const std::filesystem::path& path,
                          const std::vector<AlignedSyllable>& syllables) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write syllable table: " + path.string());
  out << "utterance_id\tstart_s\tend_s\tsurface\tphoneme_string\ttone\tonset\trime\n";
  for (const AlignedSyllable& s : syllables) {
    out << s.utterance_id << '\t' << strings::format_fixed(s.start_s, 6) << '\t'
        << strings::format_fixed(s.end_s, 6) << '\t' << s.surface << '\t' << s.phoneme_string
        << '\t' << s.tone.tone_id << '\t' << s.onset << '\t' << s.rime << '\n';
  }
  if (!out) throw Error("short write to syllable table: " + path.string());
}

std::vector<AlignedSyllable> read_syllable_table(const std::filesystem::path& path,
                                                 Language language) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open syllable table: " + path.string());
  std::vector<AlignedSyllable> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line.starts_with("utterance_id\t")) continue;
    std::vector<std::string> cols = strings::split(line, '\t');
    if (cols.size() != 8) {
      throw Error(strf("%s:%d: expected 8 columns, got %zu", path.string().c_str(), lineno,
                       cols.size()));
    }
    AlignedSyllable s;
    s.utterance_id = cols[0];
    s.start_s = std::stod(cols[1]);
    s.end_s = std::stod(cols[2]);
    s.surface = cols[3];
    s.phoneme_string = cols[4];
    s.tone.language = language;
    s.tone.tone_id = std::stoi(cols[5]);
    s.onset = cols[6];
    s.rime = cols[7];
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace toneprobe::corpus
