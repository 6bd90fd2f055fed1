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

#ifndef TONEPROBE_CLI_CONFIG_H_
#define TONEPROBE_CLI_CONFIG_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "toneprobe/corpus/corpus.h"
#include "toneprobe/experiments/model_spec.h"

namespace toneprobe::cli {

// The four experiment families a config can request.
enum class ExperimentKind { kLayerSweep, kFinetuneContrast, kTrajectory, kContrasts };

std::string_view experiment_kind_name(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view name);

// One experiment request. Which members are meaningful depends on the kind:
//   layer_sweep:        models, task
//   finetune_contrast:  pairs (each {pretrained_id, finetuned_id}), task
//   trajectory:         model, tasks
//   contrasts:          models (at least one tonal and one non-tonal)
struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::kLayerSweep;
  std::string corpus;
  std::vector<std::string> models;
  std::vector<std::array<std::string, 2>> pairs;
  std::string model;
  std::string task = "tone";              // "tone" or "consonant"
  std::vector<std::string> tasks;         // trajectory only
};

// A fully validated run declaration. Paths are absolute (resolved against
// the config file's directory); config_hash digests the canonicalized
// declaration with all defaults materialized and paths as written, so two
// files meaning the same run hash identically regardless of key order or
// spelled-out defaults.
struct RunConfig {
  uint64_t seed = 0;
  std::filesystem::path cache_dir;
  std::filesystem::path output_dir;
  double subsample_fraction = 1.0;
  double test_fraction = 0.2;
  int cv_folds = 5;
  std::vector<double> alpha_grid;
  std::string text_encoder;    // locator for the text-baseline encoder
  bool center_features = true; // subtract the train-side mean before fitting

  std::vector<corpus::ManifestSpec> corpora;
  std::vector<experiments::ModelSpec> models;
  std::vector<ExperimentSpec> experiments;

  std::filesystem::path base_dir;  // directory the config file lives in
  std::string config_hash;         // 16 hex digits

  const corpus::ManifestSpec* find_corpus(std::string_view corpus_id) const;
  const experiments::ModelSpec* find_model(std::string_view model_id) const;
};

// Command-line overrides applied to the declaration before validation and
// hashing, so an overridden run hashes like a config that spelled the
// override out.
struct ConfigOverrides {
  std::optional<uint64_t> seed;
  std::optional<double> subsample_fraction;
  std::optional<std::string> output_dir;
};

// Loads, validates and resolves a JSON config file. Validation collects
// every problem before failing: the thrown Error lists all of them, one per
// line, rather than stopping at the first.
RunConfig load_config(const std::filesystem::path& file,
                      const ConfigOverrides& overrides = {});

// load_config on config text, with base_dir standing in for the config
// file's directory. Exposed for tests and in-memory configs.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir,
                       const ConfigOverrides& overrides = {});

}  // namespace toneprobe::cli

#endif  // TONEPROBE_CLI_CONFIG_H_
