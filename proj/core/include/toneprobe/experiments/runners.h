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

#ifndef TONEPROBE_EXPERIMENTS_RUNNERS_H_
#define TONEPROBE_EXPERIMENTS_RUNNERS_H_

#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "toneprobe/cli/config.h"
#include "toneprobe/corpus/corpus.h"
#include "toneprobe/experiments/builder.h"
#include "toneprobe/experiments/report.h"
#include "toneprobe/features/adapter.h"
#include "toneprobe/features/cache.h"

namespace toneprobe::experiments {

// Loaded state shared by every experiment of one run: corpora, task tables
// with persisted splits, encoder adapters, the activation cache, and the
// baseline feature matrices. Everything is built on first use and memoized,
// so experiment order never changes what any single experiment computes.
class Workbench {
 public:
  explicit Workbench(const cli::RunConfig& config);

  const cli::RunConfig& config() const { return config_; }

  // Probe cells train on `workers` threads when > 1; extraction also fans
  // out when the model's adapter declares itself reentrant.
  void set_workers(int workers) { workers_ = workers < 1 ? 1 : workers; }
  int workers() const { return workers_; }

  struct CorpusData {
    corpus::CorpusManifest manifest;
    // Full sentence population after subsampling: text-baseline context.
    std::vector<corpus::AlignedSyllable> context;
    // The probing population: subsampled, then neutral-tone filtered.
    std::vector<corpus::AlignedSyllable> syllables;
    corpus::IngestStats stats;
  };

  const CorpusData& corpus_data(const std::string& corpus_id);

  // The task's population with its persisted split (output_dir/splits);
  // built once per (corpus, task).
  const TaskTable& task_table(const std::string& corpus_id,
                              const std::string& task_name);

  features::EncoderAdapter& encoder(const ModelSpec& model);
  features::TextEncoder& text_encoder();
  features::ActivationCache& cache() { return cache_; }

  // Baseline feature matrix for the task's rows; pseudo_layer picks among
  // kF0Layer / kMfccLayer / kTextLayer. Computed once and memoized.
  const MatrixF& baseline_matrix(const std::string& corpus_id,
                                 const std::string& task_name, int pseudo_layer);

  // Probe options for one task: the config's grid/folds/centering with the
  // fold seed derived from (config seed, task), shared across all cells of
  // the task so every layer sees identical folds.
  probe::ProbeOptions probe_options(const std::string& task_name) const;

 private:
  const cli::RunConfig& config_;
  features::ActivationCache cache_;
  int workers_ = 1;
  std::map<std::string, CorpusData> corpora_;
  std::map<std::pair<std::string, std::string>, TaskTable> tables_;
  std::map<std::string, std::unique_ptr<features::EncoderAdapter>> encoders_;
  std::map<std::tuple<std::string, std::string, int>, MatrixF> baselines_;
  std::unique_ptr<features::TextEncoder> text_encoder_;
};

// Exact number of probe trainings the experiment will dispatch; every runner
// logs this before touching audio so long sweeps are costed upfront.
int64_t planned_cells(const cli::RunConfig& config, const cli::ExperimentSpec& spec);

// The four experiment families. Each returns a report whose rows all carry
// the experiment kind's name in the experiment column; a model whose
// activations cannot be produced yields absent cells, not a failed run.
ExperimentReport run_layer_sweep(Workbench& workbench, const cli::ExperimentSpec& spec);
ExperimentReport run_finetune_contrast(Workbench& workbench,
                                       const cli::ExperimentSpec& spec);
ExperimentReport run_trajectory(Workbench& workbench, const cli::ExperimentSpec& spec);
ExperimentReport run_contrasts(Workbench& workbench, const cli::ExperimentSpec& spec);

// Dispatches on spec.kind.
ExperimentReport run_experiment(Workbench& workbench, const cli::ExperimentSpec& spec);

}  // namespace toneprobe::experiments

#endif  // TONEPROBE_EXPERIMENTS_RUNNERS_H_
