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
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "toneprobe/cli/config.h"
#include "toneprobe/common/error.h"
#include "toneprobe/experiments/analysis.h"
#include "toneprobe/fixture/fixture.h"

namespace fs = std::filesystem;
using namespace toneprobe;
using namespace toneprobe::experiments;

namespace {

// One fixture per binary run. Splits and the activation cache accumulate
// under the fixture root, which is the production layout: later cases run
// cache-warm, and identical results cache-cold vs cache-warm is itself part
// of what these tests establish.
const cli::RunConfig& fixture_config() {
  static const cli::RunConfig config = [] {
    fs::path root = fs::temp_directory_path() / "toneprobe_runners_test";
    fs::remove_all(root);
    const auto info = fixture::write_fixture(root);
    return cli::load_config(info.config_file);
  }();
  return config;
}

const cli::ExperimentSpec& spec_of(const cli::RunConfig& config,
                                   cli::ExperimentKind kind) {
  for (const auto& spec : config.experiments) {
    if (spec.kind == kind) return spec;
  }
  REQUIRE(false);
  return config.experiments.front();
}

std::vector<ReportRow> rows_of(const ExperimentReport& report,
                               const std::string& model_id) {
  std::vector<ReportRow> out;
  for (const auto& row : report.rows()) {
    if (row.model_id == model_id) out.push_back(row);
  }
  return out;
}

}  // namespace

TEST_CASE("planned_cells prices every experiment kind exactly") {
  const auto& config = fixture_config();
  // 2 models x 13 layers + 3 baselines.
  CHECK(planned_cells(config, spec_of(config, cli::ExperimentKind::kLayerSweep)) == 29);
  // 2 pairs x 2 stages x 13 layers, no baselines.
  CHECK(planned_cells(config, spec_of(config, cli::ExperimentKind::kFinetuneContrast)) ==
        52);
  // 2 tasks x (3 checkpoints x 13 layers + 3 baselines).
  CHECK(planned_cells(config, spec_of(config, cli::ExperimentKind::kTrajectory)) == 84);
  // 2 models x (2 locating sweeps x 13 layers + 6 tone pairs + 3 groups).
  CHECK(planned_cells(config, spec_of(config, cli::ExperimentKind::kContrasts)) == 70);
}

TEST_CASE("the layer sweep populates every cell of its schema") {
  const auto& config = fixture_config();
  Workbench workbench(config);
  const auto& spec = spec_of(config, cli::ExperimentKind::kLayerSweep);
  const ExperimentReport report = run_layer_sweep(workbench, spec);

  const auto rows = report.rows();
  REQUIRE(rows.size() == 29);
  for (const auto& row : rows) {
    CAPTURE(row.model_id);
    CAPTURE(row.layer_index);
    CHECK(row.experiment == "layer_sweep");
    CHECK(row.corpus == "fixture-mini");
    CHECK(row.task == "tone");
    CHECK(row.subtask == "all");
    CHECK_FALSE(row.absent);
    CHECK(row.accuracy >= 0.0);
    CHECK(row.accuracy <= 1.0);
    CHECK(row.train_n + row.test_n == 116);
    CHECK(row.realized_test_fraction >= 0.2);
    CHECK(row.seed == config.seed);
    CHECK(row.config_hash == config.config_hash);
    CHECK(std::count(config.alpha_grid.begin(), config.alpha_grid.end(),
                     row.selected_alpha) == 1);
  }

  // Model rows: all 13 layers for each swept model, at its final checkpoint.
  const auto zh = rows_of(report, "zh-pre");
  REQUIRE(zh.size() == 13);
  for (const auto& row : zh) {
    CHECK(row.checkpoint_step == 85000);  // last declared step
    CHECK(row.language == "mandarin");
    CHECK(row.tonality == "tonal");
    CHECK(row.training_stage == "pretrained");
  }
  const auto en = rows_of(report, "en-pre");
  REQUIRE(en.size() == 13);
  CHECK(en[0].checkpoint_step == -1);  // no declared steps: final sentinel

  // Baseline rows: the three pseudo-layers under the shared identity.
  const auto baseline = rows_of(report, "baseline");
  REQUIRE(baseline.size() == 3);
  std::set<int> pseudo;
  for (const auto& row : baseline) {
    pseudo.insert(row.layer_index);
    CHECK(row.language.empty());
    CHECK(row.tonality.empty());
    CHECK(row.training_stage.empty());
    CHECK(row.checkpoint_step == -1);
  }
  CHECK(pseudo == std::set<int>{kF0Layer, kMfccLayer, kTextLayer});
}

TEST_CASE("all encoder layers beat chance on tone at the trained checkpoint") {
  // The fixture synthesizes tones as distinct F0 contours, so pooled log-mel
  // projections must separate them far better than the 4-way chance rate.
  const auto& config = fixture_config();
  Workbench workbench(config);
  const auto& spec = spec_of(config, cli::ExperimentKind::kLayerSweep);
  const ExperimentReport report = run_layer_sweep(workbench, spec);
  for (const auto& row : rows_of(report, "zh-pre")) {
    CAPTURE(row.layer_index);
    CHECK(row.accuracy > 0.4);
  }
  // And the F0 baseline, which sees the contour directly, beats chance too.
  CHECK(baseline_accuracy(report, "layer_sweep", "fixture-mini", "tone", kF0Layer) >
        0.4);
}

TEST_CASE("baseline rows are identical across experiments sharing corpus and task") {
  const auto& config = fixture_config();
  Workbench workbench(config);
  const auto sweep =
      run_layer_sweep(workbench, spec_of(config, cli::ExperimentKind::kLayerSweep));
  const auto trajectory =
      run_trajectory(workbench, spec_of(config, cli::ExperimentKind::kTrajectory));

  for (int pseudo : {kF0Layer, kMfccLayer, kTextLayer}) {
    CAPTURE(pseudo);
    const double a = baseline_accuracy(sweep, "layer_sweep", "fixture-mini", "tone",
                                       pseudo);
    const double b = baseline_accuracy(trajectory, "trajectory", "fixture-mini",
                                       "tone", pseudo);
    CHECK(a == b);
  }
}

TEST_CASE("the finetune contrast reports both stages of both language pairs") {
  const auto& config = fixture_config();
  Workbench workbench(config);
  const auto& spec = spec_of(config, cli::ExperimentKind::kFinetuneContrast);
  const ExperimentReport report = run_finetune_contrast(workbench, spec);

  REQUIRE(report.size() == 52);
  std::map<std::string, int> per_model;
  for (const auto& row : report.rows()) {
    CHECK_FALSE(row.absent);
    CHECK(row.model_id != "baseline");  // contrast runs carry no baselines
    per_model[row.model_id] += 1;
  }
  for (const char* id : {"zh-pre", "zh-fine", "en-pre", "en-fine"}) {
    CAPTURE(id);
    CHECK(per_model[id] == 13);
  }

  // Deltas join pretrained and finetuned rows layer for layer.
  const auto zh = finetune_deltas(report, "finetune_contrast", "zh-pre", "zh-fine");
  REQUIRE(zh.size() == 13);
  for (int l = 0; l < 13; ++l) CHECK(zh[l].layer_index == l);
}

TEST_CASE("a finetune pair sharing a locator has exactly zero deltas") {
  // Two model declarations over the same encoder and checkpoint must yield
  // bit-identical probes; the derived deltas are exactly zero, not merely
  // small. This pins down that nothing in the pipeline depends on the
  // declaration's identity fields.
  cli::RunConfig config = fixture_config();
  ModelSpec twin = *config.find_model("zh-pre");
  twin.model_id = "zh-twin";
  twin.training_stage = TrainingStage::kFinetuned;
  config.models.push_back(twin);

  cli::ExperimentSpec spec;
  spec.kind = cli::ExperimentKind::kFinetuneContrast;
  spec.corpus = "fixture-mini";
  spec.pairs = {{"zh-pre", "zh-twin"}};
  spec.task = "tone";

  Workbench workbench(config);
  const ExperimentReport report = run_finetune_contrast(workbench, spec);
  const auto deltas = finetune_deltas(report, "finetune_contrast", "zh-pre", "zh-twin");
  REQUIRE(deltas.size() == 13);
  for (const auto& d : deltas) {
    CAPTURE(d.layer_index);
    CHECK(d.delta == 0.0);
    CHECK(d.pretrained_accuracy == d.finetuned_accuracy);
  }
  CHECK(upper_half_mean_delta(deltas, 13) == 0.0);
}

TEST_CASE("the trajectory shows learning: step zero scores below the trained end") {
  const auto& config = fixture_config();
  Workbench workbench(config);
  const auto& spec = spec_of(config, cli::ExperimentKind::kTrajectory);
  const ExperimentReport report = run_trajectory(workbench, spec);

  // 2 tasks x (3 steps x 13 layers + 3 baselines).
  REQUIRE(report.size() == 84);
  for (const auto& task : {std::string("tone"), std::string("consonant")}) {
    CAPTURE(task);
    const auto points = trajectory_points(report, "trajectory", "zh-pre", task);
    REQUIRE(points.size() == 3);
    CHECK(points[0].checkpoint_step == 0);
    CHECK(points[1].checkpoint_step == 10000);
    CHECK(points[2].checkpoint_step == 85000);
    // The untrained checkpoint is noise; training must beat it clearly.
    CHECK(points[0].best_accuracy < points[2].best_accuracy);
  }
}

TEST_CASE("the contrasts experiment emits exactly the contrast rows") {
  const auto& config = fixture_config();
  Workbench workbench(config);
  const auto& spec = spec_of(config, cli::ExperimentKind::kContrasts);
  const ExperimentReport report = run_contrasts(workbench, spec);

  // 2 models x (6 tone pairs + 3 consonant groups); the locating layer
  // sweeps stay internal.
  REQUIRE(report.size() == 18);
  const std::set<std::string> tone_subtasks = {"T1_T2", "T1_T3", "T1_T4",
                                               "T2_T3", "T2_T4", "T3_T4"};
  const std::set<std::string> group_subtasks = {"group1", "group2", "group3"};
  for (const char* id : {"zh-pre", "en-pre"}) {
    CAPTURE(id);
    const auto rows = rows_of(report, id);
    REQUIRE(rows.size() == 9);
    std::set<std::string> pairs;
    std::set<std::string> groups;
    std::set<int> pair_layers;
    std::set<int> group_layers;
    for (const auto& row : rows) {
      CHECK_FALSE(row.absent);
      CHECK(row.layer_index >= 0);
      CHECK(row.layer_index < 13);
      if (row.task == "tone_pair") {
        pairs.insert(row.subtask);
        pair_layers.insert(row.layer_index);
      } else if (row.task == "consonant") {
        groups.insert(row.subtask);
        group_layers.insert(row.layer_index);
      }
    }
    CHECK(pairs == tone_subtasks);
    CHECK(groups == group_subtasks);
    // Within a model, every pair probes one best tone layer, every group one
    // best consonant layer.
    CHECK(pair_layers.size() == 1);
    CHECK(group_layers.size() == 1);
  }

  const auto gaps = contrast_gaps(report, "contrasts", "zh-pre", "en-pre");
  CHECK(gaps.size() == 9);
}

TEST_CASE("reports are byte-identical across repeated and parallel runs") {
  const auto& config = fixture_config();
  const auto& spec = spec_of(config, cli::ExperimentKind::kLayerSweep);

  Workbench first(config);
  const std::string csv_first = to_csv(run_layer_sweep(first, spec));

  Workbench second(config);
  const std::string csv_second = to_csv(run_layer_sweep(second, spec));
  CHECK(csv_first == csv_second);

  Workbench parallel(config);
  parallel.set_workers(3);
  const std::string csv_parallel = to_csv(run_layer_sweep(parallel, spec));
  CHECK(csv_first == csv_parallel);
}

TEST_CASE("a model whose activations cannot be produced yields absent cells") {
  cli::RunConfig config = fixture_config();
  ModelSpec frozen;
  frozen.model_id = "frozen";
  frozen.language = Language::kMandarin;
  frozen.tonality = Tonality::kTonal;
  frozen.encoder = "cache:frozen-x";  // nothing was ever extracted into the cache
  config.models.push_back(frozen);

  cli::ExperimentSpec spec;
  spec.kind = cli::ExperimentKind::kLayerSweep;
  spec.corpus = "fixture-mini";
  spec.models = {"zh-pre", "frozen"};
  spec.task = "tone";

  Workbench workbench(config);
  const ExperimentReport report = run_layer_sweep(workbench, spec);
  REQUIRE(report.size() == 29);

  const auto frozen_rows = rows_of(report, "frozen");
  REQUIRE(frozen_rows.size() == 13);
  for (const auto& row : frozen_rows) {
    CHECK(row.absent);
    CHECK(row.language == "mandarin");  // identity survives the failure
    CHECK(row.seed == config.seed);
  }
  // The healthy model and the baselines are untouched by the failure.
  for (const auto& row : rows_of(report, "zh-pre")) CHECK_FALSE(row.absent);
  for (const auto& row : rows_of(report, "baseline")) CHECK_FALSE(row.absent);

  // Absent cells survive a CSV round trip as absent.
  const ExperimentReport back = parse_csv(to_csv(report));
  REQUIRE(back.size() == 29);
  int absent = 0;
  for (const auto& row : back.rows()) absent += row.absent ? 1 : 0;
  CHECK(absent == 13);
}
