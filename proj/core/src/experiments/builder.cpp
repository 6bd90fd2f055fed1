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
#include <cstring>
#include <map>
#include <set>
#include <utility>

#include "toneprobe/common/error.h"
#include "toneprobe/common/hash.h"
#include "toneprobe/common/parallel.h"
#include "toneprobe/common/rng.h"
#include "toneprobe/common/strings.h"
#include "toneprobe/common/wav.h"
#include "toneprobe/features/mfcc.h"
#include "toneprobe/features/pitch.h"
#include "toneprobe/features/pooling.h"

namespace toneprobe::experiments {

namespace fs = std::filesystem;
using strings::strf;

TaskTable build_task_table(const std::vector<corpus::AlignedSyllable>& syllables,
                           const std::string& task_name) {
  TaskTable table;
  if (task_name == "tone") {
    table.task = probe::tone_task();
    for (const auto& s : syllables) {
      table.syllables.push_back(s);
      table.labels.push_back(s.tone.tone_id);
      table.group_keys.push_back(s.phoneme_string);
    }
  } else if (task_name == "consonant") {
    table.task = probe::consonant_group_task(0);
    std::set<std::string> studied;
    for (const auto& group : probe::consonant_groups()) {
      studied.insert(group.onsets.begin(), group.onsets.end());
    }
    for (const auto& s : syllables) {
      if (studied.count(s.onset) == 0) continue;
      table.syllables.push_back(s);
      table.labels.push_back(probe::onset_label(s.onset));
      table.group_keys.push_back(s.rime);
    }
  } else {
    throw Error(strf("unknown task '%s' (expected 'tone' or 'consonant')",
                     task_name.c_str()));
  }
  if (table.syllables.empty()) {
    throw Error(strf("task '%s' has no syllables in this corpus", task_name.c_str()));
  }
  return table;
}

uint64_t task_seed(uint64_t config_seed, const std::string& task_name) {
  return hash_mix(config_seed, fnv1a64(task_name));
}

void assign_split(TaskTable& table, const probe::SplitSpec& spec,
                  const fs::path& split_file) {
  std::vector<probe::SplitItem> items;
  items.reserve(table.size());
  for (size_t i = 0; i < table.size(); ++i) {
    items.push_back({table.group_keys[i], table.labels[i]});
  }

  probe::GroupAssignment assignment;
  if (fs::exists(split_file)) {
    const probe::SplitFile stored = probe::read_split_json(split_file);
    if (stored.spec.exclusion_key != spec.exclusion_key ||
        stored.spec.test_fraction != spec.test_fraction ||
        stored.spec.seed != spec.seed) {
      throw Error(strf(
          "stored split '%s' was drawn under a different spec (%s, fraction %g, "
          "seed %llu); delete it or change the config to match",
          split_file.string().c_str(),
          probe::exclusion_key_name(stored.spec.exclusion_key).c_str(),
          stored.spec.test_fraction,
          static_cast<unsigned long long>(stored.spec.seed)));
    }
    assignment = stored.groups;
  } else {
    assignment = probe::make_exclusive_split(items, spec);
    if (split_file.has_parent_path()) fs::create_directories(split_file.parent_path());
    probe::write_split_json(split_file, {spec, assignment});
  }
  table.split = probe::assign_sides(items, assignment);
}

bool keep_utterance(const std::string& utterance_id, uint64_t seed, double fraction) {
  // One splitmix draw rather than the raw combined hash: the combiner does
  // not avalanche into the high bits, and structurally similar ids would
  // otherwise land on the same side together.
  Rng rng(hash_mix(seed, fnv1a64(utterance_id)));
  return rng.uniform() < fraction;
}

std::vector<corpus::AlignedSyllable> subsample_syllables(
    std::vector<corpus::AlignedSyllable> syllables, uint64_t seed, double fraction) {
  if (fraction >= 1.0) return syllables;
  std::vector<corpus::AlignedSyllable> kept;
  kept.reserve(syllables.size());
  for (auto& s : syllables) {
    if (keep_utterance(s.utterance_id, seed, fraction)) kept.push_back(std::move(s));
  }
  return kept;
}

int64_t resolve_checkpoint(const ModelSpec& model, int64_t requested_step) {
  if (requested_step == features::kFinalCheckpoint && !model.checkpoint_steps.empty()) {
    return model.checkpoint_steps.back();
  }
  return requested_step;
}

namespace {

// Table rows grouped by utterance, in table order within each utterance.
std::map<std::string, std::vector<size_t>> rows_by_utterance(const TaskTable& table) {
  std::map<std::string, std::vector<size_t>> rows;
  for (size_t i = 0; i < table.size(); ++i) {
    rows[table.syllables[i].utterance_id].push_back(i);
  }
  return rows;
}

std::map<std::string, fs::path> audio_paths(const corpus::CorpusManifest& manifest) {
  std::map<std::string, fs::path> paths;
  for (const auto& u : manifest.utterances) paths[u.utterance_id] = u.audio_path;
  return paths;
}

const fs::path& audio_path_for(const std::map<std::string, fs::path>& paths,
                               const std::string& utterance_id) {
  auto it = paths.find(utterance_id);
  if (it == paths.end()) {
    throw Error(strf("utterance '%s' has probe rows but no manifest entry",
                     utterance_id.c_str()));
  }
  return it->second;
}

void put_row(MatrixF& m, size_t row, const std::vector<float>& values) {
  if (values.size() != m.cols) {
    throw Error(strf("feature row has %zu dims, matrix expects %zu", values.size(),
                     m.cols));
  }
  std::memcpy(m.row(row), values.data(), m.cols * sizeof(float));
}

}  // namespace

std::vector<MatrixF> pool_layer_features(const TaskTable& table,
                                         const corpus::CorpusManifest& manifest,
                                         const ModelSpec& model,
                                         features::EncoderAdapter& encoder,
                                         features::ActivationCache& cache,
                                         int64_t checkpoint_step, int workers) {
  std::vector<MatrixF> layers(model.n_layers);
  for (auto& m : layers) m.resize(table.size(), model.dim);

  const auto rows = rows_by_utterance(table);
  const std::vector<std::pair<std::string, std::vector<size_t>>> work(rows.begin(),
                                                                      rows.end());
  const auto paths = audio_paths(manifest);
  const std::string cache_id = encoder.info().model_id;

  // Each iteration touches a disjoint utterance and writes disjoint matrix
  // rows; the cache serializes its own writers internally.
  const int effective_workers = encoder.reentrant() ? workers : 1;
  parallel_for(work.size(), effective_workers, [&](size_t w) {
    const auto& [utterance_id, row_indices] = work[w];
    features::LayerActivations acts;
    if (!cache.get(cache_id, checkpoint_step, utterance_id, &acts)) {
      const Waveform audio = read_wav(audio_path_for(paths, utterance_id));
      acts = encoder.extract(audio, checkpoint_step, utterance_id);
      cache.put(acts);
    }
    if (static_cast<int>(acts.layers.size()) != model.n_layers ||
        (!acts.layers.empty() &&
         static_cast<int>(acts.layers[0].cols) != model.dim)) {
      throw Error(strf(
          "activations for '%s' on model '%s' are %zu layers x %zu dims; the model "
          "declares %d x %d",
          utterance_id.c_str(), model.model_id.c_str(), acts.layers.size(),
          acts.layers.empty() ? size_t{0} : acts.layers[0].cols, model.n_layers,
          model.dim));
    }
    for (size_t i : row_indices) {
      const auto pooled = features::pool_syllable(acts, table.syllables[i]);
      for (int l = 0; l < model.n_layers; ++l) put_row(layers[l], i, pooled[l]);
    }
  });
  return layers;
}

MatrixF f0_features(const TaskTable& table, const corpus::CorpusManifest& manifest) {
  MatrixF out(table.size(), features::kF0WindowFrames);
  const auto rows = rows_by_utterance(table);
  const auto paths = audio_paths(manifest);
  for (const auto& [utterance_id, row_indices] : rows) {
    const Waveform audio = read_wav(audio_path_for(paths, utterance_id));
    const std::vector<float> track = features::track_f0(audio);
    for (size_t i : row_indices) {
      put_row(out, i, features::extract_f0_window(track, table.syllables[i]));
    }
  }
  return out;
}

MatrixF mfcc_features(const TaskTable& table, const corpus::CorpusManifest& manifest) {
  MatrixF out(table.size(), features::kMfccWindowDim);
  const auto rows = rows_by_utterance(table);
  const auto paths = audio_paths(manifest);
  for (const auto& [utterance_id, row_indices] : rows) {
    const Waveform audio = read_wav(audio_path_for(paths, utterance_id));
    const MatrixF frames = features::compute_mfcc_frames(audio);
    for (size_t i : row_indices) {
      put_row(out, i, features::extract_mfcc_window(frames, table.syllables[i]));
    }
  }
  return out;
}

MatrixF text_features(const TaskTable& table,
                      const std::vector<corpus::AlignedSyllable>& context_syllables,
                      features::TextEncoder& encoder) {
  // Per-utterance surface sequences in time order, from the full population:
  // the sentence as written, not the task's filtered subset.
  struct Token {
    double start_s;
    std::string surface;
  };
  std::map<std::string, std::vector<Token>> sequences;
  for (const auto& s : context_syllables) {
    sequences[s.utterance_id].push_back({s.start_s, s.surface});
  }
  for (auto& [id, tokens] : sequences) {
    std::sort(tokens.begin(), tokens.end(),
              [](const Token& a, const Token& b) { return a.start_s < b.start_s; });
  }

  MatrixF out(table.size(), encoder.dim());
  const auto rows = rows_by_utterance(table);
  for (const auto& [utterance_id, row_indices] : rows) {
    auto seq = sequences.find(utterance_id);
    if (seq == sequences.end()) {
      throw Error(strf("utterance '%s' is missing from the text-context population",
                       utterance_id.c_str()));
    }
    std::vector<std::string> characters;
    characters.reserve(seq->second.size());
    for (const Token& t : seq->second) characters.push_back(t.surface);

    for (size_t i : row_indices) {
      const double start = table.syllables[i].start_s;
      size_t position = characters.size();
      for (size_t p = 0; p < seq->second.size(); ++p) {
        if (seq->second[p].start_s == start) {
          position = p;
          break;
        }
      }
      if (position == characters.size()) {
        throw Error(strf(
            "syllable at %.6f s of '%s' has no counterpart in the text-context "
            "population",
            start, utterance_id.c_str()));
      }
      put_row(out, i, encoder.embed(characters, position));
    }
  }
  return out;
}

probe::ProbeDataset make_dataset(const TaskTable& table, MatrixF features) {
  if (features.rows != table.size()) {
    throw Error(strf("feature matrix has %zu rows for a %zu-row task table",
                     features.rows, table.size()));
  }
  probe::ProbeDataset dataset;
  dataset.features = std::move(features);
  dataset.labels = table.labels;
  dataset.group_keys = table.group_keys;
  dataset.split = table.split;
  dataset.task = table.task;
  dataset.validate();
  return dataset;
}

}  // namespace toneprobe::experiments
