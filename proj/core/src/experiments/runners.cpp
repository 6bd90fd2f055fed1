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

#include "toneprobe/experiments/runners.h"

#include <algorithm>
#include <set>
#include <utility>

#include "toneprobe/common/error.h"
#include "toneprobe/common/hash.h"
#include "toneprobe/common/log.h"
#include "toneprobe/common/parallel.h"
#include "toneprobe/common/strings.h"
#include "toneprobe/features/activations.h"

namespace toneprobe::experiments {

namespace fs = std::filesystem;
using strings::strf;

// ---------------------------------------------------------------------------
// Workbench

Workbench::Workbench(const cli::RunConfig& config)
    : config_(config), cache_(config.cache_dir) {}

const Workbench::CorpusData& Workbench::corpus_data(const std::string& corpus_id) {
  auto it = corpora_.find(corpus_id);
  if (it != corpora_.end()) return it->second;

  const corpus::ManifestSpec* spec = config_.find_corpus(corpus_id);
  if (spec == nullptr) {
    throw Error(strf("experiment references unknown corpus '%s'", corpus_id.c_str()));
  }
  CorpusData data;
  data.manifest = corpus::resolve_manifest(*spec);
  corpus::LoadResult loaded = corpus::load_corpus(data.manifest);
  data.stats = loaded.stats;

  std::vector<corpus::AlignedSyllable> population = std::move(loaded.syllables);
  if (config_.subsample_fraction < 1.0) {
    const size_t before = population.size();
    population = subsample_syllables(std::move(population),
                                     hash_mix(config_.seed, fnv1a64("subsample")),
                                     config_.subsample_fraction);
    log_info("corpus '%s': subsample fraction %g keeps %zu of %zu syllables",
             corpus_id.c_str(), config_.subsample_fraction, population.size(), before);
  }
  data.context = population;
  data.syllables = corpus::filter_neutral_tone(std::move(population), &data.stats);
  log_info("corpus '%s': %s", corpus_id.c_str(), data.stats.summary().c_str());

  auto [pos, inserted] = corpora_.emplace(corpus_id, std::move(data));
  return pos->second;
}

const TaskTable& Workbench::task_table(const std::string& corpus_id,
                                       const std::string& task_name) {
  const auto key = std::make_pair(corpus_id, task_name);
  auto it = tables_.find(key);
  if (it != tables_.end()) return it->second;

  const CorpusData& data = corpus_data(corpus_id);
  TaskTable table = build_task_table(data.syllables, task_name);
  probe::SplitSpec spec;
  spec.exclusion_key = task_name == "consonant" ? probe::ExclusionKey::kRime
                                                : probe::ExclusionKey::kPhonemeString;
  spec.test_fraction = config_.test_fraction;
  spec.seed = task_seed(config_.seed, task_name);
  const fs::path split_file =
      config_.output_dir / "splits" /
      strf("%s_%s_s%llu.json", corpus_id.c_str(), task_name.c_str(),
           static_cast<unsigned long long>(spec.seed));
  assign_split(table, spec, split_file);
  log_info("task '%s' on corpus '%s': %zu rows, realized test fraction %.4f",
           task_name.c_str(), corpus_id.c_str(), table.size(),
           probe::realized_test_fraction(table.split));

  auto [pos, inserted] = tables_.emplace(key, std::move(table));
  return pos->second;
}

features::EncoderAdapter& Workbench::encoder(const ModelSpec& model) {
  auto it = encoders_.find(model.model_id);
  if (it != encoders_.end()) return *it->second;
  auto adapter =
      features::make_encoder(model.encoder, &cache_, config_.cache_dir / "work");
  auto [pos, inserted] = encoders_.emplace(model.model_id, std::move(adapter));
  return *pos->second;
}

features::TextEncoder& Workbench::text_encoder() {
  if (!text_encoder_) {
    text_encoder_ = features::make_text_encoder(config_.text_encoder);
  }
  return *text_encoder_;
}

const MatrixF& Workbench::baseline_matrix(const std::string& corpus_id,
                                          const std::string& task_name,
                                          int pseudo_layer) {
  const auto key = std::make_tuple(corpus_id, task_name, pseudo_layer);
  auto it = baselines_.find(key);
  if (it != baselines_.end()) return it->second;

  const TaskTable& table = task_table(corpus_id, task_name);
  const CorpusData& data = corpus_data(corpus_id);
  MatrixF m;
  switch (pseudo_layer) {
    case kF0Layer:
      m = f0_features(table, data.manifest);
      break;
    case kMfccLayer:
      m = mfcc_features(table, data.manifest);
      break;
    case kTextLayer:
      m = text_features(table, data.context, text_encoder());
      break;
    default:
      throw Error(strf("layer %d is not a baseline pseudo-layer", pseudo_layer));
  }
  auto [pos, inserted] = baselines_.emplace(key, std::move(m));
  return pos->second;
}

probe::ProbeOptions Workbench::probe_options(const std::string& task_name) const {
  probe::ProbeOptions opts;
  opts.alpha_grid = config_.alpha_grid;
  opts.n_folds = config_.cv_folds;
  opts.cv_seed = task_seed(config_.seed, task_name);
  opts.center = config_.center_features;
  return opts;
}

// ---------------------------------------------------------------------------
// Shared runner plumbing

namespace {

constexpr int kBaselineCount = 3;     // f0, mfcc, text
constexpr int kTonePairCount = 6;     // C(4,2) over Mandarin tones
constexpr int kConsonantGroups = 3;

const ModelSpec& model_or_throw(const cli::RunConfig& config,
                                const std::string& model_id) {
  const ModelSpec* model = config.find_model(model_id);
  if (model == nullptr) {
    throw Error(strf("experiment references unknown model '%s'", model_id.c_str()));
  }
  return *model;
}

RunMetadata run_metadata(const cli::RunConfig& config, const std::string& corpus_id) {
  RunMetadata meta;
  meta.config_hash = config.config_hash;
  meta.seed = config.seed;
  meta.corpus = corpus_id;
  return meta;
}

ReportRow absent_row(const std::string& experiment, const std::string& corpus_id,
                     const ModelSpec& model, int64_t step, int layer,
                     const probe::TaskDescriptor& task, const cli::RunConfig& config) {
  ReportRow row;
  row.experiment = experiment;
  row.corpus = corpus_id;
  row.model_id = model.model_id;
  row.language = std::string(language_name(model.language));
  row.tonality = std::string(tonality_name(model.tonality));
  row.training_stage = std::string(training_stage_name(model.training_stage));
  row.checkpoint_step = step;
  row.layer_index = layer;
  row.task = task.task_name();
  row.subtask = task.subtask_name();
  row.seed = config.seed;
  row.config_hash = config.config_hash;
  row.absent = true;
  return row;
}

// Trains one probe per layer matrix, consuming the matrices. Results are
// indexed by layer; cells fan out over the workbench's worker threads.
std::vector<probe::ProbeResult> train_layer_probes(Workbench& workbench,
                                                   const TaskTable& table,
                                                   std::vector<MatrixF> layers,
                                                   const ModelSpec& model, int64_t step,
                                                   const probe::ProbeOptions& opts) {
  std::vector<probe::ProbeResult> results(layers.size());
  parallel_for(layers.size(), workbench.workers(), [&](size_t l) {
    probe::ProbeDataset dataset = make_dataset(table, std::move(layers[l]));
    probe::ProbeResult result = probe::train_ridge_probe(dataset, opts);
    result.model_id = model.model_id;
    result.checkpoint_step = step;
    result.layer_index = static_cast<int>(l);
    results[l] = std::move(result);
  });
  return results;
}

// Extraction + per-layer probes for one (model, checkpoint) on one task.
std::vector<probe::ProbeResult> sweep_model(Workbench& workbench,
                                            const std::string& corpus_id,
                                            const std::string& task_name,
                                            const ModelSpec& model, int64_t step) {
  const TaskTable& table = workbench.task_table(corpus_id, task_name);
  const auto& data = workbench.corpus_data(corpus_id);
  auto layers =
      pool_layer_features(table, data.manifest, model, workbench.encoder(model),
                          workbench.cache(), step, workbench.workers());
  return train_layer_probes(workbench, table, std::move(layers), model, step,
                            workbench.probe_options(task_name));
}

void emit_results(ExperimentReport& report, const std::string& experiment,
                  const std::string& corpus_id, const ModelSpec& model,
                  const std::vector<probe::ProbeResult>& results,
                  const cli::RunConfig& config) {
  for (const auto& result : results) {
    report.upsert(row_from_result(experiment, corpus_id, model, result, config.seed,
                                  config.config_hash));
  }
}

void emit_absent_layers(ExperimentReport& report, const std::string& experiment,
                        const std::string& corpus_id, const ModelSpec& model,
                        int64_t step, const probe::TaskDescriptor& task,
                        const cli::RunConfig& config) {
  for (int layer = 0; layer < model.n_layers; ++layer) {
    report.upsert(absent_row(experiment, corpus_id, model, step, layer, task, config));
  }
}

// One sweep of a model at one checkpoint, absorbed into the report; a failed
// extraction marks the cells absent and the run continues.
void sweep_into_report(Workbench& workbench, ExperimentReport& report,
                       const std::string& experiment, const std::string& corpus_id,
                       const std::string& task_name, const ModelSpec& model,
                       int64_t step) {
  const cli::RunConfig& config = workbench.config();
  try {
    emit_results(report, experiment, corpus_id, model,
                 sweep_model(workbench, corpus_id, task_name, model, step), config);
  } catch (const Error& e) {
    log_warn("%s: model '%s' at step %lld failed (%s); marking its cells absent",
             experiment.c_str(), model.model_id.c_str(),
             static_cast<long long>(step), e.what());
    emit_absent_layers(report, experiment, corpus_id, model, step,
                       workbench.task_table(corpus_id, task_name).task, config);
  }
}

void emit_baselines(Workbench& workbench, ExperimentReport& report,
                    const std::string& experiment, const std::string& corpus_id,
                    const std::string& task_name) {
  const cli::RunConfig& config = workbench.config();
  const TaskTable& table = workbench.task_table(corpus_id, task_name);
  const auto opts = workbench.probe_options(task_name);
  for (int pseudo : {kF0Layer, kMfccLayer, kTextLayer}) {
    probe::ProbeDataset dataset = make_dataset(
        table, MatrixF(workbench.baseline_matrix(corpus_id, task_name, pseudo)));
    const probe::ProbeResult result = probe::train_ridge_probe(dataset, opts);
    report.upsert(baseline_row(experiment, corpus_id, pseudo, result, config.seed,
                               config.config_hash));
  }
}

int best_layer_index(const std::vector<probe::ProbeResult>& per_layer) {
  // Argmax over test accuracy; ties go to the lower layer index.
  int best = 0;
  for (int l = 1; l < static_cast<int>(per_layer.size()); ++l) {
    if (per_layer[l].accuracy > per_layer[best].accuracy) best = l;
  }
  return best;
}

std::vector<int> distinct_labels(const std::vector<int>& labels) {
  const std::set<int> s(labels.begin(), labels.end());
  return std::vector<int>(s.begin(), s.end());
}

void log_plan(const cli::RunConfig& config, const cli::ExperimentSpec& spec) {
  log_info("[%s] corpus '%s': %lld probe cells planned",
           std::string(cli::experiment_kind_name(spec.kind)).c_str(),
           spec.corpus.c_str(),
           static_cast<long long>(planned_cells(config, spec)));
}

}  // namespace

// ---------------------------------------------------------------------------
// Cost accounting

int64_t planned_cells(const cli::RunConfig& config, const cli::ExperimentSpec& spec) {
  switch (spec.kind) {
    case cli::ExperimentKind::kLayerSweep: {
      int64_t cells = kBaselineCount;
      for (const auto& id : spec.models) cells += model_or_throw(config, id).n_layers;
      return cells;
    }
    case cli::ExperimentKind::kFinetuneContrast: {
      int64_t cells = 0;
      for (const auto& pair : spec.pairs) {
        cells += model_or_throw(config, pair[0]).n_layers;
        cells += model_or_throw(config, pair[1]).n_layers;
      }
      return cells;
    }
    case cli::ExperimentKind::kTrajectory: {
      const ModelSpec& model = model_or_throw(config, spec.model);
      const int64_t per_task =
          model.n_layers * static_cast<int64_t>(model.checkpoint_steps.size()) +
          kBaselineCount;
      return per_task * static_cast<int64_t>(spec.tasks.size());
    }
    case cli::ExperimentKind::kContrasts: {
      int64_t cells = 0;
      for (const auto& id : spec.models) {
        // Two internal layer sweeps locate the best tone and consonant
        // layers, then the pair and group probes run at those layers.
        cells += 2 * model_or_throw(config, id).n_layers + kTonePairCount +
                 kConsonantGroups;
      }
      return cells;
    }
  }
  throw Error("unhandled experiment kind");
}

// ---------------------------------------------------------------------------
// Runners

ExperimentReport run_layer_sweep(Workbench& workbench,
                                 const cli::ExperimentSpec& spec) {
  const cli::RunConfig& config = workbench.config();
  const std::string experiment(cli::experiment_kind_name(spec.kind));
  log_plan(config, spec);

  ExperimentReport report(run_metadata(config, spec.corpus));
  for (const std::string& model_id : spec.models) {
    const ModelSpec& model = model_or_throw(config, model_id);
    const int64_t step = resolve_checkpoint(model, features::kFinalCheckpoint);
    sweep_into_report(workbench, report, experiment, spec.corpus, spec.task, model,
                      step);
  }
  emit_baselines(workbench, report, experiment, spec.corpus, spec.task);
  return report;
}

ExperimentReport run_finetune_contrast(Workbench& workbench,
                                       const cli::ExperimentSpec& spec) {
  const cli::RunConfig& config = workbench.config();
  const std::string experiment(cli::experiment_kind_name(spec.kind));
  log_plan(config, spec);

  ExperimentReport report(run_metadata(config, spec.corpus));
  for (const auto& pair : spec.pairs) {
    for (const std::string& model_id : pair) {
      const ModelSpec& model = model_or_throw(config, model_id);
      const int64_t step = resolve_checkpoint(model, features::kFinalCheckpoint);
      sweep_into_report(workbench, report, experiment, spec.corpus, spec.task, model,
                        step);
    }
  }
  return report;
}

ExperimentReport run_trajectory(Workbench& workbench, const cli::ExperimentSpec& spec) {
  const cli::RunConfig& config = workbench.config();
  const std::string experiment(cli::experiment_kind_name(spec.kind));
  log_plan(config, spec);

  ExperimentReport report(run_metadata(config, spec.corpus));
  const ModelSpec& model = model_or_throw(config, spec.model);
  for (const std::string& task_name : spec.tasks) {
    emit_baselines(workbench, report, experiment, spec.corpus, task_name);
    for (int64_t step : model.checkpoint_steps) {
      sweep_into_report(workbench, report, experiment, spec.corpus, task_name, model,
                        step);
    }
  }
  return report;
}

ExperimentReport run_contrasts(Workbench& workbench, const cli::ExperimentSpec& spec) {
  const cli::RunConfig& config = workbench.config();
  const std::string experiment(cli::experiment_kind_name(spec.kind));
  log_plan(config, spec);

  ExperimentReport report(run_metadata(config, spec.corpus));
  const auto& data = workbench.corpus_data(spec.corpus);

  for (const std::string& model_id : spec.models) {
    const ModelSpec& model = model_or_throw(config, model_id);
    const int64_t step = resolve_checkpoint(model, features::kFinalCheckpoint);

    // Tone pairs, probed at this model's best tone layer.
    try {
      const TaskTable& table = workbench.task_table(spec.corpus, "tone");
      const auto opts = workbench.probe_options("tone");
      auto layers =
          pool_layer_features(table, data.manifest, model, workbench.encoder(model),
                              workbench.cache(), step, workbench.workers());

      std::vector<probe::ProbeResult> per_layer(layers.size());
      parallel_for(layers.size(), workbench.workers(), [&](size_t l) {
        probe::ProbeDataset dataset = make_dataset(table, MatrixF(layers[l]));
        per_layer[l] = probe::train_ridge_probe(dataset, opts);
        per_layer[l].layer_index = static_cast<int>(l);
      });
      const int best = best_layer_index(per_layer);
      const probe::ProbeDataset best_dataset =
          make_dataset(table, std::move(layers[best]));

      const std::vector<int> tones = distinct_labels(best_dataset.labels);
      for (size_t a = 0; a < tones.size(); ++a) {
        for (size_t b = a + 1; b < tones.size(); ++b) {
          probe::ProbeResult result =
              probe::evaluate_pair_probe(best_dataset, tones[a], tones[b], opts);
          result.model_id = model.model_id;
          result.checkpoint_step = step;
          result.layer_index = best;
          report.upsert(row_from_result(experiment, spec.corpus, model, result,
                                        config.seed, config.config_hash));
        }
      }
    } catch (const Error& e) {
      log_warn("%s: tone contrasts for '%s' failed (%s); marking cells absent",
               experiment.c_str(), model.model_id.c_str(), e.what());
      for (int a = 1; a <= 4; ++a) {
        for (int b = a + 1; b <= 4; ++b) {
          report.upsert(absent_row(experiment, spec.corpus, model, step, 0,
                                   probe::tone_pair_task(a, b), config));
        }
      }
    }

    // Consonant groups, probed at this model's best consonant layer.
    try {
      const TaskTable& table = workbench.task_table(spec.corpus, "consonant");
      const auto opts = workbench.probe_options("consonant");
      auto layers =
          pool_layer_features(table, data.manifest, model, workbench.encoder(model),
                              workbench.cache(), step, workbench.workers());

      std::vector<probe::ProbeResult> per_layer(layers.size());
      parallel_for(layers.size(), workbench.workers(), [&](size_t l) {
        probe::ProbeDataset dataset = make_dataset(table, MatrixF(layers[l]));
        per_layer[l] = probe::train_ridge_probe(dataset, opts);
        per_layer[l].layer_index = static_cast<int>(l);
      });
      const int best = best_layer_index(per_layer);
      const probe::ProbeDataset best_dataset =
          make_dataset(table, std::move(layers[best]));

      for (const auto& group : probe::consonant_groups()) {
        probe::ProbeResult result =
            probe::evaluate_consonant_group(best_dataset, group.id, opts);
        result.model_id = model.model_id;
        result.checkpoint_step = step;
        result.layer_index = best;
        report.upsert(row_from_result(experiment, spec.corpus, model, result,
                                      config.seed, config.config_hash));
      }
    } catch (const Error& e) {
      log_warn("%s: consonant contrasts for '%s' failed (%s); marking cells absent",
               experiment.c_str(), model.model_id.c_str(), e.what());
      for (const auto& group : probe::consonant_groups()) {
        report.upsert(absent_row(experiment, spec.corpus, model, step, 0,
                                 probe::consonant_group_task(group.id), config));
      }
    }
  }
  return report;
}

ExperimentReport run_experiment(Workbench& workbench,
                                const cli::ExperimentSpec& spec) {
  switch (spec.kind) {
    case cli::ExperimentKind::kLayerSweep:
      return run_layer_sweep(workbench, spec);
    case cli::ExperimentKind::kFinetuneContrast:
      return run_finetune_contrast(workbench, spec);
    case cli::ExperimentKind::kTrajectory:
      return run_trajectory(workbench, spec);
    case cli::ExperimentKind::kContrasts:
      return run_contrasts(workbench, spec);
  }
  throw Error("unhandled experiment kind");
}

}  // namespace toneprobe::experiments
