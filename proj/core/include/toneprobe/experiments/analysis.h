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

#ifndef TONEPROBE_EXPERIMENTS_ANALYSIS_H_
#define TONEPROBE_EXPERIMENTS_ANALYSIS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "toneprobe/experiments/report.h"

namespace toneprobe::experiments {

// Derived summaries over a report. All functions here are pure reads of the
// emitted rows — re-deriving a summary from a stored CSV gives the same
// answer as deriving it live. Absent cells never contribute.

struct FinetuneDelta {
  std::string corpus;
  std::string language;
  int layer_index = 0;
  double pretrained_accuracy = 0.0;
  double finetuned_accuracy = 0.0;
  double delta = 0.0;  // finetuned - pretrained
};

// Per-layer accuracy deltas for one (pretrained, finetuned) pair under one
// experiment name, sorted by layer index. Only layers populated for both
// stages appear.
std::vector<FinetuneDelta> finetune_deltas(const ExperimentReport& report,
                                           const std::string& experiment,
                                           const std::string& pretrained_id,
                                           const std::string& finetuned_id);

// First layer index of the upper half: for 13 layers (0..12), layers 6..12.
int upper_half_first_layer(int n_layers);

// Mean delta over the upper-half layers. Throws when any upper-half layer is
// missing from deltas — a silent partial mean would misstate the statistic.
double upper_half_mean_delta(const std::vector<FinetuneDelta>& deltas, int n_layers);

struct TrajectoryPoint {
  int64_t checkpoint_step = 0;
  std::string task;
  int best_layer = 0;
  double best_accuracy = 0.0;
};

// Best-over-layers accuracy per checkpoint for (model, task), sorted by
// step. Ties pick the lower layer index; baseline pseudo-layers are never
// candidates.
std::vector<TrajectoryPoint> trajectory_points(const ExperimentReport& report,
                                               const std::string& experiment,
                                               const std::string& model_id,
                                               const std::string& task);

// Accuracy of a baseline pseudo-layer row (layer_index in {-1,-2,-3}) for a
// task within an experiment. Throws when the row is missing or absent.
double baseline_accuracy(const ExperimentReport& report, const std::string& experiment,
                         const std::string& corpus, const std::string& task,
                         int pseudo_layer);

struct ContrastGap {
  std::string task;     // "tone_pair" or "consonant"
  std::string subtask;  // "T1_T2" .. "T3_T4", "group1".."group3"
  double tonal_accuracy = 0.0;
  double non_tonal_accuracy = 0.0;
  double gap = 0.0;  // tonal - non_tonal
};

// Joins the two models' contrast rows on (task, subtask) and ranks by gap,
// largest first; ties order by subtask name for determinism. Subtasks
// populated for only one model are dropped.
std::vector<ContrastGap> contrast_gaps(const ExperimentReport& report,
                                       const std::string& experiment,
                                       const std::string& tonal_model,
                                       const std::string& non_tonal_model);

}  // namespace toneprobe::experiments

#endif  // TONEPROBE_EXPERIMENTS_ANALYSIS_H_
