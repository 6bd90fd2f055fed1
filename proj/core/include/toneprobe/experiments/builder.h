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

#ifndef TONEPROBE_EXPERIMENTS_BUILDER_H_
#define TONEPROBE_EXPERIMENTS_BUILDER_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "toneprobe/common/matrix.h"
#include "toneprobe/corpus/types.h"
#include "toneprobe/experiments/model_spec.h"
#include "toneprobe/features/adapter.h"
#include "toneprobe/features/cache.h"
#include "toneprobe/probe/probe.h"
#include "toneprobe/probe/split.h"

namespace toneprobe::experiments {

// The probing population for one (corpus, task): row order, labels,
// exclusion-group keys, and the train/test split. Every representation
// probed on the task — encoder layers and acoustic/text baselines alike —
// reuses this table row for row, which is what makes their accuracies
// comparable and keeps baseline rows independent of the model under study.
struct TaskTable {
  probe::TaskDescriptor task;
  std::vector<corpus::AlignedSyllable> syllables;  // rows, corpus order
  std::vector<int> labels;
  std::vector<std::string> group_keys;
  std::vector<probe::Side> split;  // empty until assign_split

  size_t size() const { return syllables.size(); }
};

// Builds the labeled population for a task name:
//   "tone"       every syllable; label = tone id, exclusion key = toneless
//                phoneme string.
//   "consonant"  syllables whose onset belongs to one of the studied
//                consonant groups; label = canonical onset index, exclusion
//                key = rime.
// The input must already be neutral-tone filtered. Throws on an unknown task
// name or an empty resulting population.
TaskTable build_task_table(const std::vector<corpus::AlignedSyllable>& syllables,
                           const std::string& task_name);

// Seed for a task's split and cross-validation folds: one derivation shared
// by every runner, so probes over the same (config seed, task) always see
// the same partition regardless of which experiment asked first.
uint64_t task_seed(uint64_t config_seed, const std::string& task_name);

// Fills table.split. The split is drawn once per (corpus, task, seed) and
// persisted at split_file; a later call with the file present reuses the
// stored assignment after verifying it was drawn under the same spec, so
// every experiment probes the identical partition. Throws when the stored
// spec disagrees or the assignment does not cover the population.
void assign_split(TaskTable& table, const probe::SplitSpec& spec,
                  const std::filesystem::path& split_file);

// Deterministic utterance-level subsampling: an utterance is kept iff a
// seeded hash of its id falls below the fraction. Independent per id, so
// growing a corpus never flips the decision for existing utterances.
bool keep_utterance(const std::string& utterance_id, uint64_t seed, double fraction);

// Drops syllables of utterances not selected by keep_utterance. Whole
// utterances are kept or dropped so text-baseline context stays intact.
std::vector<corpus::AlignedSyllable> subsample_syllables(
    std::vector<corpus::AlignedSyllable> syllables, uint64_t seed, double fraction);

// The concrete checkpoint a "final" request means for this model: the last
// declared checkpoint step when the model declares any, otherwise the
// adapter-level final-checkpoint sentinel. Sweeps and trajectories therefore
// share one cache shard for the trained model.
int64_t resolve_checkpoint(const ModelSpec& model, int64_t requested_step);

// One extraction pass: pooled per-layer feature matrices for the table rows,
// in table order. Audio is decoded and the encoder invoked only on cache
// misses; hits are served from the activation cache, which is keyed by the
// encoder's own id so model specs sharing a locator share one shard. Returns
// model.n_layers matrices, each table.size() x model.dim. Utterances fan out
// over `workers` threads when the adapter declares itself reentrant.
std::vector<MatrixF> pool_layer_features(const TaskTable& table,
                                         const corpus::CorpusManifest& manifest,
                                         const ModelSpec& model,
                                         features::EncoderAdapter& encoder,
                                         features::ActivationCache& cache,
                                         int64_t checkpoint_step, int workers = 1);

// Acoustic baselines over the same rows: per-syllable F0 window (21 dims)
// and MFCC window (840 dims). One pitch track / MFCC matrix is computed per
// utterance and shared by its syllables.
MatrixF f0_features(const TaskTable& table, const corpus::CorpusManifest& manifest);
MatrixF mfcc_features(const TaskTable& table, const corpus::CorpusManifest& manifest);

// Text baseline over the same rows: the encoder's vector at each syllable's
// position within its utterance's surface sequence. context_syllables must
// hold the full corpus population (before task filtering; including
// neutral-tone syllables) so positions index the sentence as written.
MatrixF text_features(const TaskTable& table,
                      const std::vector<corpus::AlignedSyllable>& context_syllables,
                      features::TextEncoder& encoder);

// Binds a feature matrix to the table's labels/keys/split as a validated
// probe dataset. The matrix must have table.size() rows.
probe::ProbeDataset make_dataset(const TaskTable& table, MatrixF features);

}  // namespace toneprobe::experiments

#endif  // TONEPROBE_EXPERIMENTS_BUILDER_H_
