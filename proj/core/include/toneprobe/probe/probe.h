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

#ifndef TONEPROBE_PROBE_PROBE_H_
#define TONEPROBE_PROBE_PROBE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "toneprobe/common/matrix.h"
#include "toneprobe/probe/split.h"

namespace toneprobe::probe {

// Default regularization grid: {10^n | n in -4..2}.
const std::vector<double>& default_alpha_grid();

inline constexpr double kDefaultTestFraction = 0.20;

enum class TaskKind { kTone, kTonePair, kConsonantGroup };

struct TaskDescriptor {
  TaskKind kind = TaskKind::kTone;
  int tone_a = 0;           // tone-pair tasks
  int tone_b = 0;
  int consonant_group = 0;  // consonant-group tasks

  // Canonical names for reports: task "tone" | "tone_pair" | "consonant",
  // subtask "all" | "T1_T2" | "group1" and so on.
  std::string task_name() const;
  std::string subtask_name() const;
};

TaskDescriptor tone_task();
TaskDescriptor tone_pair_task(int tone_a, int tone_b);
TaskDescriptor consonant_group_task(int group_id);

// One probing problem: pooled feature rows, integer class labels, the
// exclusion-group key of every row, and the persisted train/test side.
struct ProbeDataset {
  MatrixF features;                    // N x D
  std::vector<int> labels;             // N
  std::vector<std::string> group_keys; // N
  std::vector<Side> split;             // N
  TaskDescriptor task;

  // Throws toneprobe::Error on any broken invariant: mismatched lengths,
  // non-finite features, a group key on both sides (leakage), or a class
  // absent from either side. Called by every probe entry point.
  void validate() const;
};

struct ProbeOptions {
  std::vector<double> alpha_grid;  // empty means default_alpha_grid()
  int n_folds = 5;
  uint64_t cv_seed = 0;
  bool center = true;
};

struct ProbeResult {
  TaskDescriptor task;
  std::string model_id;
  int64_t checkpoint_step = -1;
  int layer_index = 0;
  double selected_alpha = 0.0;
  double cv_accuracy = 0.0;  // mean CV accuracy of the selected alpha
  int64_t train_n = 0;
  int64_t test_n = 0;
  double accuracy = 0.0;     // trace(confusion) / test_n, exactly
  double realized_test_fraction = 0.0;

  // Confusion over the sorted distinct dataset labels; row = true class,
  // column = predicted class, both indexed into class_labels.
  std::vector<int> class_labels;
  std::vector<int64_t> confusion;

  int64_t confusion_at(size_t true_idx, size_t predicted_idx) const;
};

// Trains a one-vs-rest ridge probe on the train side, choosing alpha by mean
// accuracy over stratified cross-validation folds of the train side only
// (ties to the smallest alpha), refits on the full train side, and reports
// accuracy plus confusion counts on the untouched test side. A fold missing
// a class triggers re-stratification with the next seed; repeated failure is
// an error.
ProbeResult train_ridge_probe(const ProbeDataset& dataset, const ProbeOptions& opts = {});

// Binary probe over two tones: keeps only rows labeled tone_a or tone_b
// (exclusivity is inherited from the parent split) and trains as above.
// Throws when the tones are not distinct or one of them is absent.
ProbeResult evaluate_pair_probe(const ProbeDataset& tone_dataset, int tone_a,
                                int tone_b, const ProbeOptions& opts = {});

// The Mandarin onset groups under study, keyed by perceptual confusability.
struct ConsonantGroup {
  int id = 0;
  std::vector<std::string> onsets;
};
const std::vector<ConsonantGroup>& consonant_groups();  // ids 1..3

// Canonical integer encoding of Mandarin onsets for consonant datasets:
// the onset's index in the shared initials table; the empty (zero) onset
// maps one past the table. onset_name inverts it.
int onset_label(const std::string& onset);
std::string onset_name(int label);

// Within-group onset classification: keeps only rows whose onset label lies
// in group_id's onset set and trains as above. Throws on an unknown group id
// or when a group onset is entirely absent from the dataset.
ProbeResult evaluate_consonant_group(const ProbeDataset& consonant_dataset,
                                     int group_id, const ProbeOptions& opts = {});

// Rows whose label is in keep_labels, with the task relabeled; features,
// group keys, and split assignments are carried over unchanged, so an
// exclusive parent split stays exclusive in the restriction.
ProbeDataset filter_dataset(const ProbeDataset& dataset,
                            const std::vector<int>& keep_labels,
                            const TaskDescriptor& task);

}  // namespace toneprobe::probe

#endif  // TONEPROBE_PROBE_PROBE_H_
