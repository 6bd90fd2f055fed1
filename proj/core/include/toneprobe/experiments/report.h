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

#ifndef TONEPROBE_EXPERIMENTS_REPORT_H_
#define TONEPROBE_EXPERIMENTS_REPORT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "toneprobe/experiments/model_spec.h"
#include "toneprobe/probe/probe.h"

namespace toneprobe::experiments {

// Reserved pseudo-layer indices for the model-free baselines, so baseline
// rows share one schema with transformer-layer rows.
inline constexpr int kF0Layer = -1;
inline constexpr int kMfccLayer = -2;
inline constexpr int kTextLayer = -3;

// The model_id used for baseline rows. Baselines do not depend on any model,
// so every sweep over the same corpus and split produces identical rows
// under this shared identity.
inline constexpr std::string_view kBaselineModelId = "baseline";

// One result cell of an experiment: a trained probe's scores plus everything
// needed to interpret them. Field order mirrors the CSV schema.
struct ReportRow {
  std::string experiment;        // layer_sweep, finetune_contrast, ...
  std::string corpus;            // corpus identifier
  std::string model_id;          // ModelSpec id, or kBaselineModelId
  std::string language;          // language_name(), empty for baselines
  std::string tonality;          // tonality_name(), empty for baselines
  std::string training_stage;    // training_stage_name(), empty for baselines
  int64_t checkpoint_step = -1;  // -1 = final / only checkpoint
  int layer_index = 0;           // 0..n-1, or kF0Layer/kMfccLayer/kTextLayer
  std::string task;              // tone, tone_pair, consonant
  std::string subtask;           // all, T1_T2, group1, ...

  // Result fields. When absent is true the cell could not be computed and
  // these are emitted as empty CSV fields.
  double selected_alpha = 0.0;
  int64_t train_n = 0;
  int64_t test_n = 0;
  double accuracy = 0.0;
  double realized_test_fraction = 0.0;

  uint64_t seed = 0;
  std::string config_hash;  // 16 hex digits of the run configuration
  bool absent = false;
};

// Identity of a cell: two rows with equal keys describe the same experiment
// cell and the newer one overwrites the older. Doubles as the canonical row
// order of emitted CSVs.
using CellKey = std::tuple<std::string, std::string, std::string, std::string,
                           int64_t, std::string, std::string, int>;
CellKey cell_key(const ReportRow& row);

// Run-level metadata carried next to the rows. Timestamps stay out of the
// CSV so identical configurations reproduce byte-identical reports.
struct RunMetadata {
  std::string config_hash;
  uint64_t seed = 0;
  std::string corpus;
  std::string created_at;  // ISO-8601, informational only
};

// A set of experiment cells with at-most-once semantics per cell key.
class ExperimentReport {
 public:
  ExperimentReport() = default;
  explicit ExperimentReport(RunMetadata meta) : meta_(std::move(meta)) {}

  const RunMetadata& meta() const { return meta_; }
  RunMetadata& meta() { return meta_; }

  // Inserts the row, replacing any existing row with the same cell key.
  void upsert(ReportRow row);

  // Copies every row of other into this report, newer rows winning.
  void merge(const ExperimentReport& other);

  bool empty() const { return cells_.empty(); }
  size_t size() const { return cells_.size(); }

  // Rows in canonical (cell key) order.
  std::vector<ReportRow> rows() const;

  // The row stored under the given key, or nullptr.
  const ReportRow* find(const CellKey& key) const;

 private:
  std::map<CellKey, ReportRow> cells_;
  RunMetadata meta_;
};

// Builds a row from a trained probe's result. Model identity fields come
// from the spec; layer/checkpoint/score fields from the result.
ReportRow row_from_result(std::string_view experiment, std::string_view corpus,
                          const ModelSpec& model, const probe::ProbeResult& result,
                          uint64_t seed, std::string_view config_hash);

// Builds a row for a model-free baseline (layer_index selects which one).
ReportRow baseline_row(std::string_view experiment, std::string_view corpus,
                       int pseudo_layer, const probe::ProbeResult& result,
                       uint64_t seed, std::string_view config_hash);

// The fixed CSV header line (no trailing newline).
std::string_view report_csv_header();

// Renders the report as CSV: header plus one line per row in canonical
// order. Absent cells leave their five result fields empty. Throws on an
// empty report or on string fields containing CSV-hostile characters.
std::string to_csv(const ExperimentReport& report);

// Parses text produced by to_csv. Numeric fields round-trip exactly.
ExperimentReport parse_csv(std::string_view text);

// to_csv straight to a file (parent directories created).
void write_csv(const ExperimentReport& report, const std::filesystem::path& path);

// parse_csv straight from a file.
ExperimentReport read_csv(const std::filesystem::path& path);

}  // namespace toneprobe::experiments

#endif  // TONEPROBE_EXPERIMENTS_REPORT_H_
