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

#include "toneprobe/experiments/analysis.h"

#include <algorithm>
#include <map>

#include "toneprobe/common/error.h"
#include "toneprobe/common/strings.h"

namespace toneprobe::experiments {

using strings::strf;

std::vector<FinetuneDelta> finetune_deltas(const ExperimentReport& report,
                                           const std::string& experiment,
                                           const std::string& pretrained_id,
                                           const std::string& finetuned_id) {
  struct Stage {
    double accuracy = 0.0;
    std::string corpus;
    std::string language;
  };
  std::map<int, Stage> pretrained;
  std::map<int, Stage> finetuned;
  for (const ReportRow& row : report.rows()) {
    if (row.experiment != experiment || row.absent || row.layer_index < 0) continue;
    if (row.model_id == pretrained_id) {
      pretrained[row.layer_index] = {row.accuracy, row.corpus, row.language};
    } else if (row.model_id == finetuned_id) {
      finetuned[row.layer_index] = {row.accuracy, row.corpus, row.language};
    }
  }

  std::vector<FinetuneDelta> deltas;
  for (const auto& [layer, pre] : pretrained) {
    auto fine = finetuned.find(layer);
    if (fine == finetuned.end()) continue;
    FinetuneDelta d;
    d.corpus = pre.corpus;
    d.language = pre.language;
    d.layer_index = layer;
    d.pretrained_accuracy = pre.accuracy;
    d.finetuned_accuracy = fine->second.accuracy;
    d.delta = fine->second.accuracy - pre.accuracy;
    deltas.push_back(std::move(d));
  }
  return deltas;  // map iteration is layer-ascending already
}

int upper_half_first_layer(int n_layers) {
  if (n_layers < 1) throw Error("upper-half statistic needs at least one layer");
  return n_layers / 2;
}

double upper_half_mean_delta(const std::vector<FinetuneDelta>& deltas, int n_layers) {
  const int first = upper_half_first_layer(n_layers);
  double sum = 0.0;
  int found = 0;
  for (int layer = first; layer < n_layers; ++layer) {
    auto it = std::find_if(deltas.begin(), deltas.end(),
                           [layer](const FinetuneDelta& d) { return d.layer_index == layer; });
    if (it == deltas.end()) {
      throw Error(strf("upper-half mean needs layer %d, which has no delta", layer));
    }
    sum += it->delta;
    found += 1;
  }
  return sum / found;
}

std::vector<TrajectoryPoint> trajectory_points(const ExperimentReport& report,
                                               const std::string& experiment,
                                               const std::string& model_id,
                                               const std::string& task) {
  std::map<int64_t, TrajectoryPoint> best;
  for (const ReportRow& row : report.rows()) {
    if (row.experiment != experiment || row.model_id != model_id ||
        row.task != task || row.absent || row.layer_index < 0) {
      continue;
    }
    auto [it, inserted] = best.try_emplace(row.checkpoint_step);
    TrajectoryPoint& point = it->second;
    if (inserted) {
      point.checkpoint_step = row.checkpoint_step;
      point.task = task;
      point.best_layer = row.layer_index;
      point.best_accuracy = row.accuracy;
      continue;
    }
    // Strict improvement only: ties keep the earlier (lower) layer, because
    // rows() iterates layers in ascending order within a checkpoint.
    if (row.accuracy > point.best_accuracy) {
      point.best_layer = row.layer_index;
      point.best_accuracy = row.accuracy;
    }
  }

  std::vector<TrajectoryPoint> points;
  points.reserve(best.size());
  for (auto& [step, point] : best) points.push_back(std::move(point));
  return points;
}

double baseline_accuracy(const ExperimentReport& report, const std::string& experiment,
                         const std::string& corpus, const std::string& task,
                         int pseudo_layer) {
  for (const ReportRow& row : report.rows()) {
    if (row.experiment == experiment && row.corpus == corpus && row.task == task &&
        row.model_id == kBaselineModelId && row.layer_index == pseudo_layer) {
      if (row.absent) {
        throw Error(strf("baseline layer %d for task '%s' is marked absent",
                         pseudo_layer, task.c_str()));
      }
      return row.accuracy;
    }
  }
  throw Error(strf("no baseline layer %d row for task '%s' under experiment '%s'",
                   pseudo_layer, task.c_str(), experiment.c_str()));
}

std::vector<ContrastGap> contrast_gaps(const ExperimentReport& report,
                                       const std::string& experiment,
                                       const std::string& tonal_model,
                                       const std::string& non_tonal_model) {
  using SubtaskKey = std::pair<std::string, std::string>;  // (task, subtask)
  std::map<SubtaskKey, double> tonal;
  std::map<SubtaskKey, double> non_tonal;
  for (const ReportRow& row : report.rows()) {
    if (row.experiment != experiment || row.absent) continue;
    if (row.subtask == "all") continue;  // umbrella rows are not contrasts
    if (row.model_id == tonal_model) {
      tonal[{row.task, row.subtask}] = row.accuracy;
    } else if (row.model_id == non_tonal_model) {
      non_tonal[{row.task, row.subtask}] = row.accuracy;
    }
  }

  std::vector<ContrastGap> gaps;
  for (const auto& [key, accuracy] : tonal) {
    auto other = non_tonal.find(key);
    if (other == non_tonal.end()) continue;
    ContrastGap gap;
    gap.task = key.first;
    gap.subtask = key.second;
    gap.tonal_accuracy = accuracy;
    gap.non_tonal_accuracy = other->second;
    gap.gap = accuracy - other->second;
    gaps.push_back(std::move(gap));
  }
  std::sort(gaps.begin(), gaps.end(), [](const ContrastGap& a, const ContrastGap& b) {
    if (a.gap != b.gap) return a.gap > b.gap;
    if (a.task != b.task) return a.task < b.task;
    return a.subtask < b.subtask;
  });
  return gaps;
}

}  // namespace toneprobe::experiments
