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

#include "toneprobe/cli/config.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "json.hpp"
#include "toneprobe/common/error.h"
#include "toneprobe/common/hash.h"
#include "toneprobe/common/strings.h"
#include "toneprobe/probe/probe.h"

namespace toneprobe::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using strings::strf;

namespace {

using Problems = std::vector<std::string>;

const json* find_key(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<std::string_view> allowed, Problems& problems) {
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      problems.push_back(strf("%s: unknown key '%s'", where.c_str(), item.key().c_str()));
    }
  }
}

std::optional<std::string> get_string(const json& obj, const char* key,
                                      const std::string& where, bool required,
                                      Problems& problems) {
  const json* v = find_key(obj, key);
  if (v == nullptr) {
    if (required) problems.push_back(strf("%s: missing required key '%s'", where.c_str(), key));
    return std::nullopt;
  }
  if (!v->is_string()) {
    problems.push_back(strf("%s: '%s' must be a string", where.c_str(), key));
    return std::nullopt;
  }
  return v->get<std::string>();
}

std::optional<bool> get_bool(const json& obj, const char* key,
                             const std::string& where, bool required,
                             Problems& problems) {
  const json* v = find_key(obj, key);
  if (v == nullptr) {
    if (required) problems.push_back(strf("%s: missing required key '%s'", where.c_str(), key));
    return std::nullopt;
  }
  if (!v->is_boolean()) {
    problems.push_back(strf("%s: '%s' must be a boolean", where.c_str(), key));
    return std::nullopt;
  }
  return v->get<bool>();
}

std::optional<double> get_number(const json& obj, const char* key,
                                 const std::string& where, bool required,
                                 Problems& problems) {
  const json* v = find_key(obj, key);
  if (v == nullptr) {
    if (required) problems.push_back(strf("%s: missing required key '%s'", where.c_str(), key));
    return std::nullopt;
  }
  if (!v->is_number()) {
    problems.push_back(strf("%s: '%s' must be a number", where.c_str(), key));
    return std::nullopt;
  }
  return v->get<double>();
}

std::optional<uint64_t> get_uint(const json& obj, const char* key,
                                 const std::string& where, bool required,
                                 Problems& problems) {
  const json* v = find_key(obj, key);
  if (v == nullptr) {
    if (required) problems.push_back(strf("%s: missing required key '%s'", where.c_str(), key));
    return std::nullopt;
  }
  if (!v->is_number_unsigned()) {
    problems.push_back(
        strf("%s: '%s' must be a non-negative integer", where.c_str(), key));
    return std::nullopt;
  }
  return v->get<uint64_t>();
}

std::optional<int> get_int(const json& obj, const char* key, const std::string& where,
                           bool required, Problems& problems) {
  const json* v = find_key(obj, key);
  if (v == nullptr) {
    if (required) problems.push_back(strf("%s: missing required key '%s'", where.c_str(), key));
    return std::nullopt;
  }
  if (!v->is_number_integer()) {
    problems.push_back(strf("%s: '%s' must be an integer", where.c_str(), key));
    return std::nullopt;
  }
  return v->get<int>();
}

std::optional<std::vector<std::string>> get_string_array(const json& obj, const char* key,
                                                         const std::string& where,
                                                         bool required, Problems& problems) {
  const json* v = find_key(obj, key);
  if (v == nullptr) {
    if (required) problems.push_back(strf("%s: missing required key '%s'", where.c_str(), key));
    return std::nullopt;
  }
  if (!v->is_array() ||
      !std::all_of(v->begin(), v->end(), [](const json& e) { return e.is_string(); })) {
    problems.push_back(strf("%s: '%s' must be an array of strings", where.c_str(), key));
    return std::nullopt;
  }
  std::vector<std::string> out;
  for (const json& e : *v) out.push_back(e.get<std::string>());
  return out;
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  return (p.is_absolute() ? p : base / p).lexically_normal();
}

void check_id_field(const std::string& value, const char* key, const std::string& where,
                    Problems& problems) {
  if (value.empty()) {
    problems.push_back(strf("%s: '%s' is empty", where.c_str(), key));
  } else if (value.find_first_of(",\"\r\n") != std::string::npos) {
    problems.push_back(
        strf("%s: '%s' value '%s' contains a comma, quote or newline", where.c_str(),
             key, value.c_str()));
  }
}

// Parses one entry of "corpora". Returns the spec with paths resolved
// against base_dir; appends the canonical (as-written, defaults filled)
// form to canon.
corpus::ManifestSpec parse_corpus_entry(const json& obj, const std::string& where,
                                        const fs::path& base_dir, json& canon,
                                        Problems& problems) {
  corpus::ManifestSpec spec;
  check_keys(obj, where,
             {"id", "language", "audio_root", "transcript_kind", "transcript_path",
              "alignment_kind", "alignment_path", "sample_rate"},
             problems);

  if (auto id = get_string(obj, "id", where, true, problems)) {
    spec.corpus_id = *id;
    check_id_field(*id, "id", where, problems);
  }
  std::string language = "mandarin";
  if (auto lang = get_string(obj, "language", where, true, problems)) {
    language = *lang;
    try {
      spec.language = corpus::parse_language(*lang);
    } catch (const Error& e) {
      problems.push_back(strf("%s: %s", where.c_str(), e.what()));
    }
  }

  std::string audio_root;
  if (auto root = get_string(obj, "audio_root", where, true, problems)) {
    audio_root = *root;
    spec.audio_root = resolve(base_dir, *root);
    if (!fs::is_directory(spec.audio_root)) {
      problems.push_back(strf("%s: audio_root '%s' is not a directory", where.c_str(),
                              spec.audio_root.string().c_str()));
    }
  }

  std::string transcript_kind = "kaldi_text";
  if (auto kind = get_string(obj, "transcript_kind", where, false, problems)) {
    transcript_kind = *kind;
  }
  std::string transcript_path;
  if (transcript_kind == "kaldi_text") {
    spec.transcript_kind = corpus::ManifestSpec::TranscriptKind::kKaldiText;
    if (auto path = get_string(obj, "transcript_path", where, true, problems)) {
      transcript_path = *path;
      spec.transcript_path = resolve(base_dir, *path);
      if (!fs::is_regular_file(spec.transcript_path)) {
        problems.push_back(strf("%s: transcript_path '%s' is not a file", where.c_str(),
                                spec.transcript_path.string().c_str()));
      }
    }
  } else if (transcript_kind == "thchs30_trn") {
    spec.transcript_kind = corpus::ManifestSpec::TranscriptKind::kThchs30Trn;
  } else {
    problems.push_back(strf("%s: unknown transcript_kind '%s' (expected kaldi_text or "
                            "thchs30_trn)",
                            where.c_str(), transcript_kind.c_str()));
  }

  std::string alignment_kind = "dir";
  if (auto kind = get_string(obj, "alignment_kind", where, false, problems)) {
    alignment_kind = *kind;
  }
  const bool alignment_is_dir = alignment_kind == "dir";
  if (alignment_is_dir) {
    spec.alignment_kind = corpus::ManifestSpec::AlignmentKind::kDir;
  } else if (alignment_kind == "tsv_file") {
    spec.alignment_kind = corpus::ManifestSpec::AlignmentKind::kTsvFile;
  } else {
    problems.push_back(strf("%s: unknown alignment_kind '%s' (expected dir or tsv_file)",
                            where.c_str(), alignment_kind.c_str()));
  }
  std::string alignment_path;
  if (auto path = get_string(obj, "alignment_path", where, true, problems)) {
    alignment_path = *path;
    spec.alignment_path = resolve(base_dir, *path);
    if (alignment_is_dir ? !fs::is_directory(spec.alignment_path)
                         : !fs::is_regular_file(spec.alignment_path)) {
      problems.push_back(strf("%s: alignment_path '%s' is not a%s", where.c_str(),
                              spec.alignment_path.string().c_str(),
                              alignment_is_dir ? " directory" : " file"));
    }
  }

  spec.sample_rate = 16000;
  if (auto rate = get_int(obj, "sample_rate", where, false, problems)) {
    if (*rate <= 0) {
      problems.push_back(strf("%s: sample_rate must be positive", where.c_str()));
    } else {
      spec.sample_rate = *rate;
    }
  }

  json entry;
  entry["id"] = spec.corpus_id;
  entry["language"] = language;
  entry["audio_root"] = audio_root;
  entry["transcript_kind"] = transcript_kind;
  entry["transcript_path"] = transcript_path;
  entry["alignment_kind"] = alignment_kind;
  entry["alignment_path"] = alignment_path;
  entry["sample_rate"] = spec.sample_rate;
  canon.push_back(std::move(entry));
  return spec;
}

experiments::ModelSpec parse_model_entry(const json& obj, const std::string& where,
                                         json& canon, Problems& problems) {
  experiments::ModelSpec spec;
  check_keys(obj, where,
             {"model_id", "language", "tonality", "training_stage", "encoder",
              "stride_s", "n_layers", "dim", "checkpoint_steps"},
             problems);

  std::string language = "other";
  std::string tonality = "non_tonal";
  std::string stage = "pretrained";
  if (auto id = get_string(obj, "model_id", where, true, problems)) spec.model_id = *id;
  if (auto lang = get_string(obj, "language", where, true, problems)) language = *lang;
  if (auto ton = get_string(obj, "tonality", where, true, problems)) tonality = *ton;
  if (auto st = get_string(obj, "training_stage", where, false, problems)) stage = *st;
  if (auto enc = get_string(obj, "encoder", where, true, problems)) spec.encoder = *enc;

  try {
    spec.language = experiments::parse_language(language);
  } catch (const Error& e) {
    problems.push_back(strf("%s: %s", where.c_str(), e.what()));
  }
  try {
    spec.tonality = experiments::parse_tonality(tonality);
  } catch (const Error& e) {
    problems.push_back(strf("%s: %s", where.c_str(), e.what()));
  }
  try {
    spec.training_stage = experiments::parse_training_stage(stage);
  } catch (const Error& e) {
    problems.push_back(strf("%s: %s", where.c_str(), e.what()));
  }

  if (auto stride = get_number(obj, "stride_s", where, false, problems)) {
    spec.stride_s = *stride;
  }
  if (auto layers = get_int(obj, "n_layers", where, false, problems)) {
    spec.n_layers = *layers;
  }
  if (auto dim = get_uint(obj, "dim", where, false, problems)) {
    spec.dim = static_cast<size_t>(*dim);
  }
  if (const json* steps = find_key(obj, "checkpoint_steps")) {
    if (!steps->is_array() || !std::all_of(steps->begin(), steps->end(), [](const json& e) {
          return e.is_number_integer();
        })) {
      problems.push_back(
          strf("%s: 'checkpoint_steps' must be an array of integers", where.c_str()));
    } else {
      for (const json& e : *steps) spec.checkpoint_steps.push_back(e.get<int64_t>());
    }
  }

  for (const std::string& problem : experiments::model_spec_problems(spec)) {
    problems.push_back(strf("%s: %s", where.c_str(), problem.c_str()));
  }

  json entry;
  entry["model_id"] = spec.model_id;
  entry["language"] = language;
  entry["tonality"] = tonality;
  entry["training_stage"] = stage;
  entry["encoder"] = spec.encoder;
  entry["stride_s"] = spec.stride_s;
  entry["n_layers"] = spec.n_layers;
  entry["dim"] = spec.dim;
  entry["checkpoint_steps"] = spec.checkpoint_steps;
  canon.push_back(std::move(entry));
  return spec;
}

bool valid_task_name(const std::string& task) {
  return task == "tone" || task == "consonant";
}

ExperimentSpec parse_experiment_entry(const json& obj, const std::string& where,
                                      json& canon, Problems& problems) {
  ExperimentSpec spec;
  std::string kind;
  if (auto k = get_string(obj, "kind", where, true, problems)) kind = *k;
  try {
    spec.kind = parse_experiment_kind(kind);
  } catch (const Error& e) {
    problems.push_back(strf("%s: %s", where.c_str(), e.what()));
    return spec;
  }
  if (auto c = get_string(obj, "corpus", where, true, problems)) spec.corpus = *c;

  json entry;
  entry["kind"] = kind;
  entry["corpus"] = spec.corpus;

  switch (spec.kind) {
    case ExperimentKind::kLayerSweep:
      check_keys(obj, where, {"kind", "corpus", "models", "task"}, problems);
      if (auto models = get_string_array(obj, "models", where, true, problems)) {
        spec.models = *models;
      }
      if (auto task = get_string(obj, "task", where, false, problems)) spec.task = *task;
      if (!valid_task_name(spec.task)) {
        problems.push_back(strf("%s: unknown task '%s' (expected tone or consonant)",
                                where.c_str(), spec.task.c_str()));
      }
      entry["models"] = spec.models;
      entry["task"] = spec.task;
      break;

    case ExperimentKind::kFinetuneContrast: {
      check_keys(obj, where, {"kind", "corpus", "pairs", "task"}, problems);
      const json* pairs = find_key(obj, "pairs");
      if (pairs == nullptr) {
        problems.push_back(strf("%s: missing required key 'pairs'", where.c_str()));
      } else if (!pairs->is_array()) {
        problems.push_back(strf("%s: 'pairs' must be an array", where.c_str()));
      } else {
        for (const json& pair : *pairs) {
          if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() ||
              !pair[1].is_string()) {
            problems.push_back(strf(
                "%s: each pair must be [pretrained_id, finetuned_id]", where.c_str()));
            continue;
          }
          spec.pairs.push_back({pair[0].get<std::string>(), pair[1].get<std::string>()});
        }
      }
      if (auto task = get_string(obj, "task", where, false, problems)) spec.task = *task;
      if (!valid_task_name(spec.task)) {
        problems.push_back(strf("%s: unknown task '%s' (expected tone or consonant)",
                                where.c_str(), spec.task.c_str()));
      }
      json pair_array = json::array();
      for (const auto& pair : spec.pairs) pair_array.push_back({pair[0], pair[1]});
      entry["pairs"] = std::move(pair_array);
      entry["task"] = spec.task;
      break;
    }

    case ExperimentKind::kTrajectory:
      check_keys(obj, where, {"kind", "corpus", "model", "tasks"}, problems);
      if (auto model = get_string(obj, "model", where, true, problems)) {
        spec.model = *model;
      }
      spec.tasks = {"tone", "consonant"};
      if (auto tasks = get_string_array(obj, "tasks", where, false, problems)) {
        spec.tasks = *tasks;
      }
      if (spec.tasks.empty()) {
        problems.push_back(strf("%s: 'tasks' must not be empty", where.c_str()));
      }
      for (const std::string& task : spec.tasks) {
        if (!valid_task_name(task)) {
          problems.push_back(strf("%s: unknown task '%s' (expected tone or consonant)",
                                  where.c_str(), task.c_str()));
        }
      }
      entry["model"] = spec.model;
      entry["tasks"] = spec.tasks;
      break;

    case ExperimentKind::kContrasts:
      check_keys(obj, where, {"kind", "corpus", "models"}, problems);
      if (auto models = get_string_array(obj, "models", where, true, problems)) {
        spec.models = *models;
      }
      entry["models"] = spec.models;
      break;
  }
  canon.push_back(std::move(entry));
  return spec;
}

void check_task_language(const std::string& task, corpus::Language language,
                         const std::string& where, Problems& problems) {
  if (task == "tone" && language != corpus::Language::kMandarin &&
      language != corpus::Language::kVietnamese) {
    problems.push_back(
        strf("%s: tone probing needs a Mandarin or Vietnamese corpus, got %.*s",
             where.c_str(), static_cast<int>(corpus::language_name(language).size()),
             corpus::language_name(language).data()));
  }
  if (task == "consonant" && language != corpus::Language::kMandarin) {
    problems.push_back(
        strf("%s: consonant probing needs a Mandarin corpus, got %.*s", where.c_str(),
             static_cast<int>(corpus::language_name(language).size()),
             corpus::language_name(language).data()));
  }
}

}  // namespace

std::string_view experiment_kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kLayerSweep: return "layer_sweep";
    case ExperimentKind::kFinetuneContrast: return "finetune_contrast";
    case ExperimentKind::kTrajectory: return "trajectory";
    case ExperimentKind::kContrasts: return "contrasts";
  }
  throw Error("unreachable: unknown experiment kind");
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  if (name == "layer_sweep") return ExperimentKind::kLayerSweep;
  if (name == "finetune_contrast") return ExperimentKind::kFinetuneContrast;
  if (name == "trajectory") return ExperimentKind::kTrajectory;
  if (name == "contrasts") return ExperimentKind::kContrasts;
  throw Error(strf("unknown experiment kind '%.*s' (expected layer_sweep, "
                   "finetune_contrast, trajectory or contrasts)",
                   static_cast<int>(name.size()), name.data()));
}

const corpus::ManifestSpec* RunConfig::find_corpus(std::string_view corpus_id) const {
  for (const corpus::ManifestSpec& spec : corpora) {
    if (spec.corpus_id == corpus_id) return &spec;
  }
  return nullptr;
}

const experiments::ModelSpec* RunConfig::find_model(std::string_view model_id) const {
  for (const experiments::ModelSpec& spec : models) {
    if (spec.model_id == model_id) return &spec;
  }
  return nullptr;
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir,
                       const ConfigOverrides& overrides) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(strf("config is not valid JSON: %s", e.what()));
  }
  if (!root.is_object()) throw Error("config root must be a JSON object");

  // Overrides are spliced into the declaration before validation, so an
  // overridden run is indistinguishable from a config that spelled it out.
  if (overrides.seed.has_value()) root["seed"] = *overrides.seed;
  if (overrides.subsample_fraction.has_value()) {
    root["subsample_fraction"] = *overrides.subsample_fraction;
  }
  if (overrides.output_dir.has_value()) root["output_dir"] = *overrides.output_dir;

  Problems problems;
  RunConfig config;
  config.base_dir = base_dir;

  check_keys(root, "config",
             {"seed", "cache_dir", "output_dir", "subsample_fraction", "test_fraction",
              "cv_folds", "alpha_grid", "text_encoder", "center_features", "corpora",
              "models", "experiments"},
             problems);

  if (find_key(root, "seed") == nullptr) {
    problems.push_back(
        "config: 'seed' is mandatory; runs must not be implicitly random");
  } else if (auto seed = get_uint(root, "seed", "config", true, problems)) {
    config.seed = *seed;
  }

  std::string cache_dir = "cache";
  std::string output_dir = "out";
  if (auto dir = get_string(root, "cache_dir", "config", false, problems)) {
    cache_dir = *dir;
  }
  if (auto dir = get_string(root, "output_dir", "config", false, problems)) {
    output_dir = *dir;
  }
  config.cache_dir = resolve(base_dir, cache_dir);
  config.output_dir = resolve(base_dir, output_dir);

  if (auto fraction = get_number(root, "subsample_fraction", "config", false, problems)) {
    config.subsample_fraction = *fraction;
  }
  if (!(config.subsample_fraction > 0.0) || config.subsample_fraction > 1.0) {
    problems.push_back(strf("config: subsample_fraction must be in (0, 1], got %g",
                            config.subsample_fraction));
  }
  if (auto fraction = get_number(root, "test_fraction", "config", false, problems)) {
    config.test_fraction = *fraction;
  }
  if (!(config.test_fraction > 0.0) || !(config.test_fraction < 1.0)) {
    problems.push_back(
        strf("config: test_fraction must be in (0, 1), got %g", config.test_fraction));
  }
  if (auto folds = get_int(root, "cv_folds", "config", false, problems)) {
    config.cv_folds = *folds;
  }
  if (config.cv_folds < 2) {
    problems.push_back(
        strf("config: cv_folds must be at least 2, got %d", config.cv_folds));
  }

  config.text_encoder = "stub:text-base";
  if (auto locator = get_string(root, "text_encoder", "config", false, problems)) {
    config.text_encoder = *locator;
    if (config.text_encoder.empty()) {
      problems.push_back("config: 'text_encoder' must not be empty");
    }
  }

  if (auto center = get_bool(root, "center_features", "config", false, problems)) {
    config.center_features = *center;
  }

  config.alpha_grid = probe::default_alpha_grid();
  if (const json* grid = find_key(root, "alpha_grid")) {
    if (!grid->is_array() || grid->empty() ||
        !std::all_of(grid->begin(), grid->end(),
                     [](const json& e) { return e.is_number(); })) {
      problems.push_back("config: 'alpha_grid' must be a non-empty array of numbers");
    } else {
      config.alpha_grid.clear();
      for (const json& e : *grid) config.alpha_grid.push_back(e.get<double>());
      for (double alpha : config.alpha_grid) {
        if (!std::isfinite(alpha) || alpha <= 0.0) {
          problems.push_back(
              strf("config: alpha_grid entries must be positive, got %g", alpha));
          break;
        }
      }
      if (std::adjacent_find(config.alpha_grid.begin(), config.alpha_grid.end(),
                             [](double a, double b) { return a >= b; }) !=
          config.alpha_grid.end()) {
        problems.push_back("config: alpha_grid must be strictly increasing");
      }
    }
  }

  json canon_corpora = json::array();
  if (const json* corpora = find_key(root, "corpora")) {
    if (!corpora->is_array() || corpora->empty()) {
      problems.push_back("config: 'corpora' must be a non-empty array");
    } else {
      for (size_t i = 0; i < corpora->size(); ++i) {
        const std::string where = strf("corpora[%zu]", i);
        if (!(*corpora)[i].is_object()) {
          problems.push_back(strf("%s: must be an object", where.c_str()));
          continue;
        }
        config.corpora.push_back(
            parse_corpus_entry((*corpora)[i], where, base_dir, canon_corpora, problems));
      }
    }
  } else {
    problems.push_back("config: missing required key 'corpora'");
  }

  json canon_models = json::array();
  if (const json* models = find_key(root, "models")) {
    if (!models->is_array()) {
      problems.push_back("config: 'models' must be an array");
    } else {
      for (size_t i = 0; i < models->size(); ++i) {
        const std::string where = strf("models[%zu]", i);
        if (!(*models)[i].is_object()) {
          problems.push_back(strf("%s: must be an object", where.c_str()));
          continue;
        }
        config.models.push_back(
            parse_model_entry((*models)[i], where, canon_models, problems));
      }
    }
  }

  json canon_experiments = json::array();
  if (const json* experiments = find_key(root, "experiments")) {
    if (!experiments->is_array()) {
      problems.push_back("config: 'experiments' must be an array");
    } else {
      for (size_t i = 0; i < experiments->size(); ++i) {
        const std::string where = strf("experiments[%zu]", i);
        if (!(*experiments)[i].is_object()) {
          problems.push_back(strf("%s: must be an object", where.c_str()));
          continue;
        }
        config.experiments.push_back(
            parse_experiment_entry((*experiments)[i], where, canon_experiments, problems));
      }
    }
  }

  // Cross-entity checks: unique identifiers, resolvable references, and
  // task/language compatibility.
  std::set<std::string> corpus_ids;
  for (const corpus::ManifestSpec& spec : config.corpora) {
    if (!spec.corpus_id.empty() && !corpus_ids.insert(spec.corpus_id).second) {
      problems.push_back(strf("config: duplicate corpus id '%s'", spec.corpus_id.c_str()));
    }
  }
  std::set<std::string> model_ids;
  for (const experiments::ModelSpec& spec : config.models) {
    if (!spec.model_id.empty() && !model_ids.insert(spec.model_id).second) {
      problems.push_back(strf("config: duplicate model id '%s'", spec.model_id.c_str()));
    }
  }

  for (size_t i = 0; i < config.experiments.size(); ++i) {
    const ExperimentSpec& spec = config.experiments[i];
    const std::string where = strf("experiments[%zu]", i);

    const corpus::ManifestSpec* corpus_spec = config.find_corpus(spec.corpus);
    if (corpus_spec == nullptr) {
      problems.push_back(
          strf("%s: references unknown corpus '%s'", where.c_str(), spec.corpus.c_str()));
    }
    const auto check_model_ref = [&](const std::string& id) {
      const experiments::ModelSpec* model = config.find_model(id);
      if (model == nullptr) {
        problems.push_back(
            strf("%s: references unknown model '%s'", where.c_str(), id.c_str()));
      }
      return model;
    };

    switch (spec.kind) {
      case ExperimentKind::kLayerSweep:
        if (spec.models.empty()) {
          problems.push_back(strf("%s: 'models' must not be empty", where.c_str()));
        }
        for (const std::string& id : spec.models) check_model_ref(id);
        if (corpus_spec != nullptr) {
          check_task_language(spec.task, corpus_spec->language, where, problems);
        }
        break;

      case ExperimentKind::kFinetuneContrast: {
        if (spec.pairs.empty()) {
          problems.push_back(strf("%s: 'pairs' must not be empty", where.c_str()));
        }
        for (const auto& pair : spec.pairs) {
          const experiments::ModelSpec* pre = check_model_ref(pair[0]);
          const experiments::ModelSpec* fine = check_model_ref(pair[1]);
          if (pre != nullptr &&
              pre->training_stage != experiments::TrainingStage::kPretrained) {
            problems.push_back(strf("%s: pair member '%s' must be a pretrained model",
                                    where.c_str(), pair[0].c_str()));
          }
          if (fine != nullptr &&
              fine->training_stage != experiments::TrainingStage::kFinetuned) {
            problems.push_back(strf("%s: pair member '%s' must be a finetuned model",
                                    where.c_str(), pair[1].c_str()));
          }
          if (pre != nullptr && fine != nullptr && pre->language != fine->language) {
            problems.push_back(
                strf("%s: pair (%s, %s) mixes languages", where.c_str(), pair[0].c_str(),
                     pair[1].c_str()));
          }
        }
        if (corpus_spec != nullptr) {
          check_task_language(spec.task, corpus_spec->language, where, problems);
        }
        break;
      }

      case ExperimentKind::kTrajectory: {
        const experiments::ModelSpec* model = check_model_ref(spec.model);
        if (model != nullptr && model->checkpoint_steps.empty()) {
          problems.push_back(
              strf("%s: model '%s' declares no checkpoint_steps to sweep", where.c_str(),
                   spec.model.c_str()));
        }
        if (corpus_spec != nullptr) {
          for (const std::string& task : spec.tasks) {
            check_task_language(task, corpus_spec->language, where, problems);
          }
        }
        break;
      }

      case ExperimentKind::kContrasts: {
        if (spec.models.empty()) {
          problems.push_back(strf("%s: 'models' must not be empty", where.c_str()));
        }
        bool any_tonal = false;
        bool any_non_tonal = false;
        for (const std::string& id : spec.models) {
          if (const experiments::ModelSpec* model = check_model_ref(id)) {
            (model->tonality == experiments::Tonality::kTonal ? any_tonal
                                                              : any_non_tonal) = true;
          }
        }
        if (!spec.models.empty() && (!any_tonal || !any_non_tonal)) {
          problems.push_back(strf(
              "%s: contrasts need at least one tonal and one non-tonal model",
              where.c_str()));
        }
        if (corpus_spec != nullptr) {
          check_task_language("consonant", corpus_spec->language, where, problems);
        }
        break;
      }
    }
  }

  if (!problems.empty()) {
    std::string message = strf("invalid config (%zu problem%s):", problems.size(),
                               problems.size() == 1 ? "" : "s");
    for (const std::string& problem : problems) {
      message += "\n  - ";
      message += problem;
    }
    throw Error(message);
  }

  // The digest covers every field that can influence computed results;
  // storage locations (cache_dir, output_dir) are deliberately excluded so
  // relocating caches or outputs does not orphan completed cells.
  json canon;
  canon["seed"] = config.seed;
  canon["subsample_fraction"] = config.subsample_fraction;
  canon["test_fraction"] = config.test_fraction;
  canon["cv_folds"] = config.cv_folds;
  canon["alpha_grid"] = config.alpha_grid;
  canon["text_encoder"] = config.text_encoder;
  canon["center_features"] = config.center_features;
  canon["corpora"] = std::move(canon_corpora);
  canon["models"] = std::move(canon_models);
  canon["experiments"] = std::move(canon_experiments);
  config.config_hash = hex64(fnv1a64(canon.dump()));
  return config;
}

RunConfig load_config(const std::filesystem::path& file, const ConfigOverrides& overrides) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(strf("cannot open config '%s'", file.string().c_str()));
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const fs::path base_dir = fs::absolute(file).parent_path().lexically_normal();
  try {
    return parse_config(text, base_dir, overrides);
  } catch (const Error& e) {
    throw Error(strf("%s: %s", file.string().c_str(), e.what()));
  }
}

}  // namespace toneprobe::cli
