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

#include "toneprobe/experiments/builder.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "toneprobe/cli/config.h"
#include "toneprobe/common/error.h"
#include "toneprobe/common/hash.h"
#include "toneprobe/common/wav.h"
#include "toneprobe/corpus/corpus.h"
#include "toneprobe/features/adapter.h"
#include "toneprobe/features/cache.h"
#include "toneprobe/features/mfcc.h"
#include "toneprobe/features/pitch.h"
#include "toneprobe/features/pooling.h"
#include "toneprobe/fixture/fixture.h"

namespace fs = std::filesystem;
using namespace toneprobe;
using namespace toneprobe::experiments;

namespace {

struct FixtureWorld {
  fixture::FixtureInfo info;
  cli::RunConfig config;
  corpus::CorpusManifest manifest;
  std::vector<corpus::AlignedSyllable> context;    // full population
  std::vector<corpus::AlignedSyllable> syllables;  // neutral-tone filtered
};

// One shared corpus load per binary run; each case reads the same tree.
const FixtureWorld& world() {
  static const FixtureWorld w = [] {
    FixtureWorld out;
    fs::path root = fs::temp_directory_path() / "toneprobe_builder_test";
    fs::remove_all(root);
    out.info = fixture::write_fixture(root);
    out.config = cli::load_config(out.info.config_file);
    out.manifest = corpus::resolve_manifest(out.config.corpora[0]);
    corpus::LoadResult loaded = corpus::load_corpus(out.manifest);
    out.context = loaded.syllables;
    out.syllables = corpus::filter_neutral_tone(std::move(loaded.syllables), nullptr);
    return out;
  }();
  return w;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

probe::SplitSpec tone_spec(uint64_t config_seed) {
  probe::SplitSpec spec;
  spec.exclusion_key = probe::ExclusionKey::kPhonemeString;
  spec.test_fraction = 0.2;
  spec.seed = task_seed(config_seed, "tone");
  return spec;
}

}  // namespace

TEST_CASE("build_task_table labels the tone population in corpus order") {
  const auto& w = world();
  const TaskTable table = build_task_table(w.syllables, "tone");
  CHECK(table.task.task_name() == "tone");
  CHECK(table.task.subtask_name() == "all");
  REQUIRE(table.size() == w.syllables.size());
  REQUIRE(table.labels.size() == table.size());
  REQUIRE(table.group_keys.size() == table.size());
  CHECK(table.split.empty());
  for (size_t i = 0; i < table.size(); ++i) {
    CHECK(table.labels[i] == w.syllables[i].tone.tone_id);
    CHECK(table.group_keys[i] == w.syllables[i].phoneme_string);
  }
}

TEST_CASE("build_task_table restricts the consonant population to studied onsets") {
  const auto& w = world();
  const TaskTable table = build_task_table(w.syllables, "consonant");
  CHECK(table.task.task_name() == "consonant");
  CHECK(table.task.subtask_name() == "all");
  CHECK(table.size() == 93);

  std::set<std::string> studied;
  for (const auto& group : probe::consonant_groups()) {
    studied.insert(group.onsets.begin(), group.onsets.end());
  }
  CHECK(studied.size() == 8);
  for (size_t i = 0; i < table.size(); ++i) {
    CHECK(studied.count(table.syllables[i].onset) == 1);
    CHECK(table.labels[i] == probe::onset_label(table.syllables[i].onset));
    CHECK(table.group_keys[i] == table.syllables[i].rime);
  }
}

TEST_CASE("build_task_table rejects unknown tasks and empty populations") {
  const auto& w = world();
  CHECK_THROWS_AS(build_task_table(w.syllables, "prosody"), Error);
  CHECK_THROWS_AS(build_task_table({}, "tone"), Error);
}

TEST_CASE("task_seed is deterministic and separates tasks") {
  CHECK(task_seed(11, "tone") == task_seed(11, "tone"));
  CHECK(task_seed(11, "tone") != task_seed(11, "consonant"));
  CHECK(task_seed(11, "tone") != task_seed(12, "tone"));
}

TEST_CASE("assign_split persists the assignment and reuses it verbatim") {
  const auto& w = world();
  const fs::path dir = fresh_dir("toneprobe_builder_split");
  const fs::path file = dir / "tone.json";

  TaskTable first = build_task_table(w.syllables, "tone");
  assign_split(first, tone_spec(w.config.seed), file);
  REQUIRE(first.split.size() == first.size());
  CHECK(fs::exists(file));

  // A second table against the stored file must see the identical sides.
  TaskTable second = build_task_table(w.syllables, "tone");
  assign_split(second, tone_spec(w.config.seed), file);
  CHECK(second.split == first.split);

  // Exclusivity: no phoneme string may straddle the split.
  std::map<std::string, std::set<probe::Side>> sides_by_key;
  for (size_t i = 0; i < first.size(); ++i) {
    sides_by_key[first.group_keys[i]].insert(first.split[i]);
  }
  for (const auto& [key, sides] : sides_by_key) {
    CAPTURE(key);
    CHECK(sides.size() == 1);
  }
}

TEST_CASE("assign_split refuses a stored split drawn under a different spec") {
  const auto& w = world();
  const fs::path dir = fresh_dir("toneprobe_builder_split_mismatch");
  const fs::path file = dir / "tone.json";

  TaskTable table = build_task_table(w.syllables, "tone");
  assign_split(table, tone_spec(w.config.seed), file);

  probe::SplitSpec other = tone_spec(w.config.seed);
  other.test_fraction = 0.3;
  TaskTable again = build_task_table(w.syllables, "tone");
  CHECK_THROWS_WITH_AS(assign_split(again, other, file),
                       doctest::Contains("drawn under a different spec"), Error);
}

TEST_CASE("keep_utterance is a deterministic per-id coin with the right mean") {
  CHECK(keep_utterance("fix_000", 7, 1.0));
  CHECK_FALSE(keep_utterance("fix_000", 7, 0.0));
  CHECK(keep_utterance("fix_000", 7, 0.5) == keep_utterance("fix_000", 7, 0.5));

  int kept = 0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    if (keep_utterance("utt_" + std::to_string(i), 7, 0.3)) ++kept;
  }
  // Binomial(4000, 0.3) stays within 5 sigma of the mean.
  CHECK(std::abs(kept / static_cast<double>(n) - 0.3) < 0.037);
}

TEST_CASE("subsample_syllables keeps or drops whole utterances") {
  const auto& w = world();
  const uint64_t seed = hash_mix(w.config.seed, fnv1a64("subsample"));
  const auto sampled = subsample_syllables(w.context, seed, 0.5);
  CHECK(!sampled.empty());
  CHECK(sampled.size() < w.context.size());

  std::map<std::string, size_t> full_counts;
  for (const auto& s : w.context) full_counts[s.utterance_id] += 1;
  std::map<std::string, size_t> sampled_counts;
  for (const auto& s : sampled) sampled_counts[s.utterance_id] += 1;
  for (const auto& [id, count] : sampled_counts) {
    CAPTURE(id);
    CHECK(count == full_counts[id]);
    CHECK(keep_utterance(id, seed, 0.5));
  }
  // And the dropped ones are exactly the ids the coin rejects.
  for (const auto& [id, count] : full_counts) {
    CHECK(sampled_counts.count(id) == static_cast<size_t>(keep_utterance(id, seed, 0.5)));
  }
}

TEST_CASE("resolve_checkpoint maps the final sentinel onto declared steps") {
  ModelSpec model;
  model.model_id = "m";
  SUBCASE("no declared steps: the sentinel passes through") {
    CHECK(resolve_checkpoint(model, features::kFinalCheckpoint) ==
          features::kFinalCheckpoint);
  }
  SUBCASE("declared steps: final means the last one") {
    model.checkpoint_steps = {0, 5000, 85000};
    CHECK(resolve_checkpoint(model, features::kFinalCheckpoint) == 85000);
  }
  SUBCASE("an explicit step is untouched") {
    model.checkpoint_steps = {0, 5000, 85000};
    CHECK(resolve_checkpoint(model, 5000) == 5000);
  }
}

TEST_CASE("pool_layer_features matches a brute-force per-utterance oracle") {
  const auto& w = world();
  const fs::path cache_dir = fresh_dir("toneprobe_builder_pool_cache");
  features::ActivationCache cache(cache_dir);

  const ModelSpec& model = *w.config.find_model("zh-pre");
  auto encoder = features::make_encoder(model.encoder, &cache, cache_dir / "work");

  TaskTable table = build_task_table(w.syllables, "tone");
  const auto layers = pool_layer_features(table, w.manifest, model, *encoder, cache,
                                          85000, /*workers=*/1);
  REQUIRE(layers.size() == static_cast<size_t>(model.n_layers));
  for (const auto& m : layers) {
    CHECK(m.rows == table.size());
    CHECK(m.cols == model.dim);
  }

  // Oracle: re-extract two utterances directly and pool each syllable span
  // without going through the builder.
  auto oracle_encoder = features::make_encoder(model.encoder, nullptr, cache_dir);
  for (const char* utt : {"fix_000", "fix_007"}) {
    const corpus::UtteranceEntry* entry = nullptr;
    for (const auto& e : w.manifest.utterances) {
      if (e.utterance_id == utt) entry = &e;
    }
    REQUIRE(entry != nullptr);
    const Waveform audio = read_wav(entry->audio_path);
    const auto acts = oracle_encoder->extract(audio, 85000, utt);
    for (size_t row = 0; row < table.size(); ++row) {
      if (table.syllables[row].utterance_id != utt) continue;
      const auto pooled = features::pool_syllable(acts, table.syllables[row]);
      REQUIRE(pooled.size() == layers.size());
      for (size_t l = 0; l < layers.size(); ++l) {
        const float* got = layers[l].row(row);
        for (size_t d = 0; d < model.dim; ++d) {
          REQUIRE(got[d] == doctest::Approx(pooled[l][d]).epsilon(1e-6));
        }
      }
    }
  }

  // A second pass is served from the cache and reproduces the matrices.
  const auto layers2 = pool_layer_features(table, w.manifest, model, *encoder, cache,
                                           85000, /*workers=*/1);
  for (size_t l = 0; l < layers.size(); ++l) {
    CHECK(layers2[l].data == layers[l].data);
  }
}

TEST_CASE("pooling in parallel reproduces the single-threaded matrices") {
  const auto& w = world();
  const fs::path cache_dir = fresh_dir("toneprobe_builder_pool_parallel");
  features::ActivationCache cache(cache_dir);
  const ModelSpec& model = *w.config.find_model("zh-pre");
  auto encoder = features::make_encoder(model.encoder, &cache, cache_dir / "work");

  TaskTable table = build_task_table(w.syllables, "consonant");
  const auto one = pool_layer_features(table, w.manifest, model, *encoder, cache,
                                       85000, /*workers=*/1);
  const auto four = pool_layer_features(table, w.manifest, model, *encoder, cache,
                                        85000, /*workers=*/4);
  REQUIRE(one.size() == four.size());
  for (size_t l = 0; l < one.size(); ++l) CHECK(one[l].data == four[l].data);
}

TEST_CASE("baseline feature matrices carry the documented dimensions") {
  const auto& w = world();
  TaskTable table = build_task_table(w.syllables, "tone");

  const MatrixF f0 = f0_features(table, w.manifest);
  CHECK(f0.rows == table.size());
  CHECK(f0.cols == features::kF0WindowFrames);

  const MatrixF mfcc = mfcc_features(table, w.manifest);
  CHECK(mfcc.rows == table.size());
  CHECK(mfcc.cols == features::kMfccWindowDim);

  auto text_encoder = features::make_text_encoder("stub:text-base");
  const MatrixF text = text_features(table, w.context, *text_encoder);
  CHECK(text.rows == table.size());
  CHECK(text.cols == text_encoder->dim());
}

TEST_CASE("f0 baseline rows match the single-syllable extraction oracle") {
  const auto& w = world();
  TaskTable table = build_task_table(w.syllables, "tone");
  const MatrixF f0 = f0_features(table, w.manifest);

  // Oracle: extract one syllable's window straight from its audio.
  const size_t row = 5;
  const auto& syllable = table.syllables[row];
  const corpus::UtteranceEntry* entry = nullptr;
  for (const auto& e : w.manifest.utterances) {
    if (e.utterance_id == syllable.utterance_id) entry = &e;
  }
  REQUIRE(entry != nullptr);
  const Waveform audio = read_wav(entry->audio_path);
  const auto window = features::extract_f0_window(audio, syllable);
  REQUIRE(window.size() == static_cast<size_t>(f0.cols));
  for (size_t d = 0; d < window.size(); ++d) {
    CHECK(f0.row(row)[d] == doctest::Approx(window[d]).epsilon(1e-6));
  }
}

TEST_CASE("text features are position-sensitive and tone-digit aware") {
  const auto& w = world();
  TaskTable table = build_task_table(w.syllables, "tone");
  auto text_encoder = features::make_text_encoder("stub:text-base");
  const MatrixF text = text_features(table, w.context, *text_encoder);

  // Two rows with different surface tokens must differ somewhere; identical
  // (surface, position) pairs must agree exactly.
  std::map<std::pair<std::string, size_t>, size_t> seen;
  size_t distinct_checked = 0;
  for (size_t i = 0; i < table.size() && distinct_checked < 4; ++i) {
    for (size_t j = i + 1; j < table.size() && distinct_checked < 4; ++j) {
      if (table.syllables[i].surface == table.syllables[j].surface) continue;
      bool differs = false;
      for (size_t d = 0; d < static_cast<size_t>(text.cols); ++d) {
        if (text.row(i)[d] != text.row(j)[d]) {
          differs = true;
          break;
        }
      }
      CHECK(differs);
      ++distinct_checked;
    }
  }
  CHECK(distinct_checked == 4);
}

TEST_CASE("make_dataset validates its way to a usable probe dataset") {
  const auto& w = world();
  const fs::path dir = fresh_dir("toneprobe_builder_dataset");
  TaskTable table = build_task_table(w.syllables, "tone");
  assign_split(table, tone_spec(w.config.seed), dir / "tone.json");

  const MatrixF f0 = f0_features(table, w.manifest);
  const probe::ProbeDataset dataset = make_dataset(table, MatrixF(f0));
  CHECK(dataset.features.rows == table.size());
  CHECK(dataset.labels == table.labels);
  CHECK(dataset.split == table.split);
  CHECK(dataset.task.task_name() == "tone");

  // Wrong row count is rejected.
  MatrixF wrong;
  wrong.resize(3, 21);
  CHECK_THROWS_AS(make_dataset(table, std::move(wrong)), Error);
}
