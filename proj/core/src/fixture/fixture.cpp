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

#include "toneprobe/fixture/fixture.h"

#include <cmath>
#include <fstream>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "toneprobe/common/error.h"
#include "toneprobe/common/hash.h"
#include "toneprobe/common/rng.h"
#include "toneprobe/common/strings.h"
#include "toneprobe/common/wav.h"
#include "toneprobe/corpus/pinyin.h"

namespace toneprobe::fixture {

namespace fs = std::filesystem;
using nlohmann::json;
using strings::strf;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Toneless bases, all legal pinyin. The first 32 carry the onsets under
// study (sh/x | ch/zh/q | s/z/c) across shared rimes (i, u, a/ia, e/ie) so
// rime-exclusive consonant splits keep every onset on both sides; the last
// 12 are filler syllables that only tone tasks see.
constexpr std::string_view kVocabulary[] = {
    "sha", "she", "shu", "shi", "cha", "che", "chu", "chi", "zha", "zhe", "zhu",
    "zhi", "sa",  "se",  "su",  "si",  "za",  "ze",  "zu",  "zi",  "ca",  "ce",
    "cu",  "ci",  "xi",  "xu",  "xia", "xie", "qi",  "qu",  "qia", "qie", "ma",
    "mi",  "mu",  "mo",  "da",  "de",  "du",  "di",  "la",  "le",  "lu",  "li"};
constexpr size_t kVocabularySize = std::size(kVocabulary);

// Citation F0 contours over normalized syllable time: T1 high level, T2
// rising, T3 dipping, T4 falling; the neutral tone is a short mid level.
double tone_f0(int tone, double t) {
  switch (tone) {
    case 1: return 220.0;
    case 2: return 180.0 + 80.0 * t;
    case 3: return 200.0 - 210.0 * t + 220.0 * t * t;
    case 4: return 280.0 - 110.0 * t;
    default: return 190.0;
  }
}

bool is_fricative(std::string_view onset) {
  return onset == "sh" || onset == "s" || onset == "x" || onset == "f" || onset == "h";
}

bool is_affricate(std::string_view onset) {
  return onset == "ch" || onset == "zh" || onset == "q" || onset == "z" ||
         onset == "c" || onset == "j";
}

// The noise band that stands in for each initial's place/manner cues. The
// eight studied sibilants get well-separated centers so pooled vectors can
// actually discriminate them.
double onset_center_hz(std::string_view onset) {
  if (onset == "sh") return 2600.0;
  if (onset == "ch") return 2900.0;
  if (onset == "zh") return 2300.0;
  if (onset == "x") return 4100.0;
  if (onset == "q") return 4400.0;
  if (onset == "s") return 5200.0;
  if (onset == "z") return 4700.0;
  if (onset == "c") return 5000.0;
  if (onset == "m") return 300.0;
  if (onset == "d") return 3500.0;
  if (onset == "l") return 900.0;
  return 2000.0;
}

// Two nominal formants per nucleus, used to weight the rime's harmonics.
void vowel_formants(char nucleus, double* f1, double* f2) {
  switch (nucleus) {
    case 'a': *f1 = 850.0; *f2 = 1250.0; break;
    case 'e': *f1 = 550.0; *f2 = 1100.0; break;
    case 'i': *f1 = 320.0; *f2 = 2500.0; break;
    case 'u': *f1 = 350.0; *f2 = 750.0; break;
    case 'o': *f1 = 500.0; *f2 = 900.0; break;
    default:  *f1 = 500.0; *f2 = 1500.0; break;
  }
}

double gaussian_bump(double f, double center, double width) {
  const double d = (f - center) / width;
  return std::exp(-0.5 * d * d);
}

// Raised-cosine fade at both ends so segment joins never click.
double envelope(size_t i, size_t count, size_t ramp) {
  if (i < ramp) return 0.5 - 0.5 * std::cos(kPi * static_cast<double>(i) / ramp);
  const size_t from_end = count - 1 - i;
  if (from_end < ramp) {
    return 0.5 - 0.5 * std::cos(kPi * static_cast<double>(from_end) / ramp);
  }
  return 1.0;
}

// Narrow-band noise: a bed of random sinusoids inside [fc - bw, fc + bw].
void render_noise_band(std::vector<float>& samples, size_t begin, size_t count,
                       double fc, double bw, double amp, int sample_rate, Rng& rng) {
  constexpr int kPartials = 24;
  double freq[kPartials];
  double phase[kPartials];
  for (int p = 0; p < kPartials; ++p) {
    freq[p] = fc + (2.0 * rng.uniform() - 1.0) * bw;
    phase[p] = 2.0 * kPi * rng.uniform();
  }
  const size_t ramp = static_cast<size_t>(0.005 * sample_rate);
  for (size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    double s = 0.0;
    for (int p = 0; p < kPartials; ++p) s += std::sin(2.0 * kPi * freq[p] * t + phase[p]);
    samples[begin + i] += static_cast<float>(
        amp * envelope(i, count, ramp) * s / std::sqrt(double(kPartials)));
  }
}

// Harmonic rime: twelve partials tracking the tone contour, weighted by the
// nucleus formants so different rimes get different spectra.
void render_rime(std::vector<float>& samples, size_t begin, size_t count, int tone,
                 char nucleus, double amp, int sample_rate, Rng& rng) {
  constexpr int kHarmonics = 12;
  double f1 = 0.0;
  double f2 = 0.0;
  vowel_formants(nucleus, &f1, &f2);

  const double f0_mid = tone_f0(tone, 0.5);
  double gain[kHarmonics];
  double phase[kHarmonics];
  double gain_total = 0.0;
  for (int h = 0; h < kHarmonics; ++h) {
    const double f = f0_mid * (h + 1);
    gain[h] = (1.0 / (h + 1)) *
              (1.0 + 2.0 * gaussian_bump(f, f1, 160.0) + 1.5 * gaussian_bump(f, f2, 260.0));
    phase[h] = 2.0 * kPi * rng.uniform();
    gain_total += gain[h];
  }

  const size_t ramp = static_cast<size_t>(0.012 * sample_rate);
  for (size_t i = 0; i < count; ++i) {
    const double t01 = static_cast<double>(i) / count;
    const double f0 = tone_f0(tone, t01);
    double s = 0.0;
    for (int h = 0; h < kHarmonics; ++h) {
      phase[h] += 2.0 * kPi * (h + 1) * f0 / sample_rate;
      s += gain[h] * std::sin(phase[h]);
    }
    samples[begin + i] += static_cast<float>(amp * envelope(i, count, ramp) * s / gain_total);
  }
}

struct SyllableTiming {
  double onset_s = 0.0;
  double rime_s = 0.0;
};

SyllableTiming timing_for(std::string_view onset, int tone) {
  SyllableTiming t;
  if (is_fricative(onset)) {
    t.onset_s = 0.065;
  } else if (is_affricate(onset)) {
    t.onset_s = 0.075;
  } else {
    t.onset_s = 0.050;
  }
  t.rime_s = tone == 5 ? 0.110 : 0.150;
  return t;
}

json fixture_config(const FixtureOptions& options) {
  const auto model = [](const char* id, const char* language, const char* tonality,
                        const char* stage, const char* encoder) {
    json m;
    m["model_id"] = id;
    m["language"] = language;
    m["tonality"] = tonality;
    m["training_stage"] = stage;
    m["encoder"] = encoder;
    return m;
  };
  json zh_pre = model("zh-pre", "mandarin", "tonal", "pretrained", "stub:zh-base");
  zh_pre["checkpoint_steps"] = {0, 10000, 85000};

  json config;
  config["seed"] = options.run_seed;
  config["cache_dir"] = "cache";
  config["output_dir"] = "out";
  config["corpora"] = json::array({{{"id", "fixture-mini"},
                                    {"language", "mandarin"},
                                    {"audio_root", "wav"},
                                    {"transcript_path", "text"},
                                    {"alignment_kind", "tsv_file"},
                                    {"alignment_path", "alignments.tsv"},
                                    {"sample_rate", options.sample_rate}}});
  config["models"] = json::array(
      {zh_pre, model("zh-fine", "mandarin", "tonal", "finetuned", "stub:zh-ft"),
       model("en-pre", "english", "non_tonal", "pretrained", "stub:en-base"),
       model("en-fine", "english", "non_tonal", "finetuned", "stub:en-ft")});
  config["experiments"] = json::array(
      {{{"kind", "layer_sweep"},
        {"corpus", "fixture-mini"},
        {"models", {"zh-pre", "en-pre"}},
        {"task", "tone"}},
       {{"kind", "finetune_contrast"},
        {"corpus", "fixture-mini"},
        {"pairs", json::array({json::array({"zh-pre", "zh-fine"}),
                               json::array({"en-pre", "en-fine"})})},
        {"task", "tone"}},
       {{"kind", "trajectory"},
        {"corpus", "fixture-mini"},
        {"model", "zh-pre"},
        {"tasks", {"tone", "consonant"}}},
       {{"kind", "contrasts"},
        {"corpus", "fixture-mini"},
        {"models", {"zh-pre", "en-pre"}}}});
  return config;
}

}  // namespace

FixtureInfo write_fixture(const fs::path& root, const FixtureOptions& options) {
  if (options.n_utterances < 1 || options.syllables_per_utterance < 1) {
    throw Error("fixture needs at least one utterance of at least one syllable");
  }
  if (options.sample_rate < 8000) {
    throw Error(strf("fixture sample rate %d is too low for the synthesis bands",
                     options.sample_rate));
  }
  const int sr = options.sample_rate;
  fs::create_directories(root / "wav");

  std::ofstream text(root / "text", std::ios::binary | std::ios::trunc);
  std::ofstream alignments(root / "alignments.tsv", std::ios::binary | std::ios::trunc);
  if (!text || !alignments) {
    throw Error(strf("cannot create fixture files under '%s'", root.string().c_str()));
  }
  alignments << "# utterance_id\tstart_s\tend_s\tlabel\n";

  const double lead_s = 0.12;
  const double gap_s = 0.025;
  const double tail_s = 0.12;

  int syllable_slot = 0;
  for (int u = 0; u < options.n_utterances; ++u) {
    const std::string utterance_id = strf("fix_%03d", u);
    Rng rng(hash_mix(options.audio_seed, fnv1a64(utterance_id)));

    // Lay out this utterance's syllables first so the buffer is sized once.
    struct Slot {
      std::string token;
      corpus::PinyinSyllable syllable;
      SyllableTiming timing;
    };
    std::vector<Slot> slots;
    double speech_s = 0.0;
    for (int s = 0; s < options.syllables_per_utterance; ++s, ++syllable_slot) {
      const int k = syllable_slot;
      const std::string_view base = kVocabulary[k % kVocabularySize];
      const int tone =
          k % 29 == 28 ? 5 : 1 + static_cast<int>((k + k / kVocabularySize) % 4);
      Slot slot;
      slot.token = strf("%.*s%d", static_cast<int>(base.size()), base.data(), tone);
      slot.syllable = corpus::parse_pinyin(slot.token);
      slot.timing = timing_for(slot.syllable.onset, tone);
      speech_s += slot.timing.onset_s + slot.timing.rime_s;
      slots.push_back(std::move(slot));
    }
    const double total_s = lead_s + speech_s +
                           gap_s * (options.syllables_per_utterance - 1) + tail_s;
    std::vector<float> samples(static_cast<size_t>(total_s * sr) + 1, 0.0f);

    text << utterance_id;
    double cursor_s = 0.0;
    const auto emit_interval = [&](double start, double end, const std::string& label) {
      alignments << utterance_id << '\t' << strings::format_fixed(start, 6) << '\t'
                 << strings::format_fixed(end, 6) << '\t' << label << '\n';
    };

    emit_interval(0.0, lead_s, "sil");
    cursor_s = lead_s;
    for (size_t s = 0; s < slots.size(); ++s) {
      const Slot& slot = slots[s];
      const double start_s = cursor_s;
      const size_t onset_begin = static_cast<size_t>(start_s * sr);
      const size_t onset_count = static_cast<size_t>(slot.timing.onset_s * sr);
      const std::string& onset = slot.syllable.onset;

      if (is_affricate(onset)) {
        // Closure silence then a short burst: the affricate signature.
        const size_t closure = onset_count / 3;
        render_noise_band(samples, onset_begin + closure, onset_count - closure,
                          onset_center_hz(onset), 500.0, 0.17, sr, rng);
      } else if (is_fricative(onset)) {
        render_noise_band(samples, onset_begin, onset_count, onset_center_hz(onset),
                          500.0, 0.15, sr, rng);
      } else {
        render_noise_band(samples, onset_begin, onset_count, onset_center_hz(onset),
                          150.0, 0.10, sr, rng);
      }

      const size_t rime_begin = onset_begin + onset_count;
      const size_t rime_count = static_cast<size_t>(slot.timing.rime_s * sr);
      render_rime(samples, rime_begin, rime_count, slot.syllable.tone_digit,
                  slot.syllable.rime.back(), 0.30, sr, rng);

      const double end_s =
          static_cast<double>(rime_begin + rime_count) / static_cast<double>(sr);
      emit_interval(start_s, end_s, slot.token);
      text << ' ' << slot.token;
      cursor_s = end_s;
      if (s + 1 < slots.size()) {
        emit_interval(cursor_s, cursor_s + gap_s, "sil");
        cursor_s += gap_s;
      }
    }
    emit_interval(cursor_s, static_cast<double>(samples.size()) / sr, "sil");
    text << '\n';

    write_wav_pcm16(root / "wav" / (utterance_id + ".wav"), sr, samples);
  }
  text.close();
  alignments.close();
  if (!text || !alignments) {
    throw Error(strf("failed writing fixture files under '%s'", root.string().c_str()));
  }

  const fs::path config_file = root / "config.json";
  std::ofstream config_out(config_file, std::ios::binary | std::ios::trunc);
  config_out << fixture_config(options).dump(2) << '\n';
  if (!config_out) {
    throw Error(strf("failed writing '%s'", config_file.string().c_str()));
  }

  FixtureInfo info;
  info.root = root;
  info.config_file = config_file;
  info.n_utterances = options.n_utterances;
  info.n_syllables = syllable_slot;
  return info;
}

}  // namespace toneprobe::fixture
