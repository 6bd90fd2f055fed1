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

#include "toneprobe/probe/probe.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "toneprobe/common/error.h"
#include "toneprobe/common/hash.h"
#include "toneprobe/common/rng.h"
#include "toneprobe/common/strings.h"
#include "toneprobe/corpus/pinyin.h"
#include "toneprobe/probe/ridge.h"

namespace toneprobe::probe {

using strings::strf;

namespace {

constexpr int kMaxStratifyAttempts = 5;

// Fold id per entry of `rows`: within each class, rows are shuffled and dealt
// round-robin, so any class with at least n_folds members lands in every fold.
std::vector<int> stratified_folds(const std::vector<int>& classes,
                                  const std::vector<uint32_t>& rows, int n_folds,
                                  uint64_t seed) {
  std::map<int, std::vector<size_t>> by_class;  // positions into `rows`
  for (size_t i = 0; i < rows.size(); ++i) by_class[classes[rows[i]]].push_back(i);

  std::vector<int> fold_of(rows.size(), 0);
  for (auto& [label, positions] : by_class) {
    Rng rng(hash_mix(seed, static_cast<uint64_t>(static_cast<int64_t>(label))));
    rng.shuffle(positions);
    for (size_t i = 0; i < positions.size(); ++i) {
      fold_of[positions[i]] = static_cast<int>(i % static_cast<size_t>(n_folds));
    }
  }
  return fold_of;
}

// The degenerate-fold condition: some fold lacks some class entirely.
// Returns the offending (fold, class-index) or {-1, -1}.
std::pair<int, int> find_missing_class(const std::vector<int>& fold_of,
                                       const std::vector<int>& class_idx,
                                       const std::vector<uint32_t>& rows,
                                       int n_folds, int n_classes) {
  std::vector<std::vector<char>> seen(static_cast<size_t>(n_folds),
                                      std::vector<char>(static_cast<size_t>(n_classes), 0));
  for (size_t i = 0; i < rows.size(); ++i) {
    seen[static_cast<size_t>(fold_of[i])][static_cast<size_t>(class_idx[rows[i]])] = 1;
  }
  for (int f = 0; f < n_folds; ++f) {
    for (int c = 0; c < n_classes; ++c) {
      if (!seen[static_cast<size_t>(f)][static_cast<size_t>(c)]) return {f, c};
    }
  }
  return {-1, -1};
}

}  // namespace

// ---------------------------------------------------------------------------
// Task descriptors

const std::vector<double>& default_alpha_grid() {
  static const std::vector<double> kGrid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};
  return kGrid;
}

std::string TaskDescriptor::task_name() const {
  switch (kind) {
    case TaskKind::kTone:
      return "tone";
    case TaskKind::kTonePair:
      return "tone_pair";
    case TaskKind::kConsonantGroup:
      return "consonant";
  }
  throw Error("unhandled task kind");
}

std::string TaskDescriptor::subtask_name() const {
  switch (kind) {
    case TaskKind::kTone:
      return "all";
    case TaskKind::kTonePair:
      return strf("T%d_T%d", tone_a, tone_b);
    case TaskKind::kConsonantGroup:
      // Group 0 is the umbrella task over every studied onset; 1..3 are the
      // within-group restrictions.
      return consonant_group == 0 ? "all" : strf("group%d", consonant_group);
  }
  throw Error("unhandled task kind");
}

TaskDescriptor tone_task() { return TaskDescriptor{}; }

TaskDescriptor tone_pair_task(int tone_a, int tone_b) {
  TaskDescriptor task;
  task.kind = TaskKind::kTonePair;
  task.tone_a = std::min(tone_a, tone_b);
  task.tone_b = std::max(tone_a, tone_b);
  return task;
}

TaskDescriptor consonant_group_task(int group_id) {
  TaskDescriptor task;
  task.kind = TaskKind::kConsonantGroup;
  task.consonant_group = group_id;
  return task;
}

// ---------------------------------------------------------------------------
// Dataset invariants

void ProbeDataset::validate() const {
  const size_t n = features.rows;
  if (n == 0) throw Error("probe dataset has no rows");
  if (features.cols == 0) throw Error("probe dataset has no feature dimensions");
  if (labels.size() != n || group_keys.size() != n || split.size() != n) {
    throw Error(strf("probe dataset is ragged: %zu feature rows, %zu labels, "
                     "%zu group keys, %zu split entries",
                     n, labels.size(), group_keys.size(), split.size()));
  }
  for (float v : features.data) {
    if (!std::isfinite(v)) throw Error("probe dataset contains non-finite feature values");
  }

  // Leakage check: every group key must live on exactly one side.
  std::unordered_map<std::string, Side> side_of;
  side_of.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    if (group_keys[i].empty()) {
      throw Error(strf("probe dataset row %zu has an empty group key", i));
    }
    auto [it, inserted] = side_of.emplace(group_keys[i], split[i]);
    if (!inserted && it->second != split[i]) {
      throw Error("exclusive split is leaking: group key '" + group_keys[i] +
                  "' appears on both the train and the test side");
    }
  }

  std::set<int> all_labels, train_labels, test_labels;
  for (size_t i = 0; i < n; ++i) {
    all_labels.insert(labels[i]);
    (split[i] == Side::kTrain ? train_labels : test_labels).insert(labels[i]);
  }
  for (int label : all_labels) {
    if (!train_labels.count(label)) {
      throw Error(strf("class %d is absent from the train side", label));
    }
    if (!test_labels.count(label)) {
      throw Error(strf("class %d is absent from the test side", label));
    }
  }
}

// ---------------------------------------------------------------------------
// Training

int64_t ProbeResult::confusion_at(size_t true_idx, size_t predicted_idx) const {
  const size_t c = class_labels.size();
  if (true_idx >= c || predicted_idx >= c) throw Error("confusion index out of range");
  return confusion[true_idx * c + predicted_idx];
}

ProbeResult train_ridge_probe(const ProbeDataset& dataset, const ProbeOptions& opts) {
  dataset.validate();
  const std::vector<double>& grid =
      opts.alpha_grid.empty() ? default_alpha_grid() : opts.alpha_grid;
  for (double alpha : grid) {
    if (!(alpha > 0.0)) {
      throw Error(strf("regularization grid contains a non-positive value %g", alpha));
    }
  }
  if (opts.n_folds < 2) {
    throw Error(strf("cross-validation needs at least 2 folds, got %d", opts.n_folds));
  }

  // Map the dataset's integer labels onto dense class indices 0..C-1 in
  // sorted label order, which fixes the confusion-matrix axes.
  std::vector<int> class_labels(dataset.labels.begin(), dataset.labels.end());
  std::sort(class_labels.begin(), class_labels.end());
  class_labels.erase(std::unique(class_labels.begin(), class_labels.end()),
                     class_labels.end());
  const int n_classes = static_cast<int>(class_labels.size());
  if (n_classes < 2) throw Error("probe training needs at least two classes");
  std::map<int, int> index_of;
  for (int c = 0; c < n_classes; ++c) index_of[class_labels[static_cast<size_t>(c)]] = c;
  std::vector<int> class_idx(dataset.labels.size());
  for (size_t i = 0; i < dataset.labels.size(); ++i) class_idx[i] = index_of[dataset.labels[i]];

  std::vector<uint32_t> train_rows, test_rows;
  for (size_t i = 0; i < dataset.split.size(); ++i) {
    (dataset.split[i] == Side::kTrain ? train_rows : test_rows)
        .push_back(static_cast<uint32_t>(i));
  }

  // Stratify the train side into folds; a fold missing a class is degenerate
  // (its complement cannot be scored on that class), so re-draw with the
  // next seed a bounded number of times.
  std::vector<int> fold_of;
  std::pair<int, int> missing{-1, -1};
  for (int attempt = 0; attempt < kMaxStratifyAttempts; ++attempt) {
    fold_of = stratified_folds(class_idx, train_rows, opts.n_folds, opts.cv_seed + attempt);
    missing = find_missing_class(fold_of, class_idx, train_rows, opts.n_folds, n_classes);
    if (missing.first < 0) break;
  }
  if (missing.first >= 0) {
    throw Error(strf(
        "cross-validation fold %d is missing class %d after %d re-stratifications; "
        "the train side has too few members of that class for %d folds",
        missing.first, class_labels[static_cast<size_t>(missing.second)],
        kMaxStratifyAttempts, opts.n_folds));
  }

  // With more rows than dimensions, fill per-fold sufficient statistics in
  // one pass so every leave-one-fold-out fit is pure linear algebra on the
  // D x D system. Below that, fitting from the raw fold rows lets the solver
  // take the small kernel formulation instead.
  const bool stats_path = train_rows.size() >= dataset.features.cols;
  std::vector<RidgeStats> complement_stats;
  RidgeStats train_stats;
  std::vector<std::vector<uint32_t>> complement_rows;
  if (stats_path) {
    std::vector<RidgeStats> fold_stats;
    fold_stats.reserve(static_cast<size_t>(opts.n_folds));
    for (int f = 0; f < opts.n_folds; ++f) {
      fold_stats.emplace_back(dataset.features.cols, n_classes);
    }
    for (size_t i = 0; i < train_rows.size(); ++i) {
      fold_stats[static_cast<size_t>(fold_of[i])].add(
          dataset.features.row_span(train_rows[i]), class_idx[train_rows[i]]);
    }
    train_stats = RidgeStats(dataset.features.cols, n_classes);
    for (const RidgeStats& fs : fold_stats) train_stats.merge(fs);
    complement_stats.reserve(fold_stats.size());
    for (const RidgeStats& fs : fold_stats) {
      RidgeStats complement = train_stats;
      complement.remove(fs);
      complement_stats.push_back(std::move(complement));
    }
  } else {
    complement_rows.assign(static_cast<size_t>(opts.n_folds), {});
    for (size_t i = 0; i < train_rows.size(); ++i) {
      for (int f = 0; f < opts.n_folds; ++f) {
        if (fold_of[i] != f) complement_rows[static_cast<size_t>(f)].push_back(train_rows[i]);
      }
    }
  }

  // Grid search: mean of per-fold accuracies, ascending alpha, strict
  // improvement required — ties resolve to the smallest alpha.
  double best_alpha = grid.front();
  double best_cv = -1.0;
  for (double alpha : grid) {
    RidgeOptions ridge_opts{alpha, opts.center};
    double fold_acc_sum = 0.0;
    for (int f = 0; f < opts.n_folds; ++f) {
      RidgeModel model =
          stats_path
              ? fit_ridge(complement_stats[static_cast<size_t>(f)], ridge_opts)
              : fit_ridge_rows(dataset.features, class_idx,
                               complement_rows[static_cast<size_t>(f)], n_classes,
                               ridge_opts);
      int64_t correct = 0, total = 0;
      for (size_t i = 0; i < train_rows.size(); ++i) {
        if (fold_of[i] != f) continue;
        ++total;
        if (model.predict(dataset.features.row_span(train_rows[i])) ==
            class_idx[train_rows[i]]) {
          ++correct;
        }
      }
      fold_acc_sum += static_cast<double>(correct) / static_cast<double>(total);
    }
    const double cv = fold_acc_sum / static_cast<double>(opts.n_folds);
    if (cv > best_cv) {
      best_cv = cv;
      best_alpha = alpha;
    }
  }

  const RidgeOptions final_opts{best_alpha, opts.center};
  RidgeModel final_model =
      stats_path ? fit_ridge(train_stats, final_opts)
                 : fit_ridge_rows(dataset.features, class_idx, train_rows, n_classes,
                                  final_opts);

  ProbeResult result;
  result.task = dataset.task;
  result.selected_alpha = best_alpha;
  result.cv_accuracy = best_cv;
  result.train_n = static_cast<int64_t>(train_rows.size());
  result.test_n = static_cast<int64_t>(test_rows.size());
  result.realized_test_fraction = realized_test_fraction(dataset.split);
  result.class_labels = class_labels;
  result.confusion.assign(static_cast<size_t>(n_classes) * static_cast<size_t>(n_classes), 0);
  for (uint32_t r : test_rows) {
    const int predicted = final_model.predict(dataset.features.row_span(r));
    result.confusion[static_cast<size_t>(class_idx[r]) * static_cast<size_t>(n_classes) +
                     static_cast<size_t>(predicted)] += 1;
  }
  int64_t trace = 0;
  for (int c = 0; c < n_classes; ++c) {
    trace += result.confusion[static_cast<size_t>(c) * static_cast<size_t>(n_classes) +
                              static_cast<size_t>(c)];
  }
  result.accuracy = static_cast<double>(trace) / static_cast<double>(result.test_n);
  return result;
}

// ---------------------------------------------------------------------------
// Restricted tasks

ProbeDataset filter_dataset(const ProbeDataset& dataset,
                            const std::vector<int>& keep_labels,
                            const TaskDescriptor& task) {
  std::set<int> keep(keep_labels.begin(), keep_labels.end());
  std::vector<size_t> rows;
  for (size_t i = 0; i < dataset.labels.size(); ++i) {
    if (keep.count(dataset.labels[i])) rows.push_back(i);
  }
  ProbeDataset out;
  out.task = task;
  out.features.resize(rows.size(), dataset.features.cols);
  out.labels.reserve(rows.size());
  out.group_keys.reserve(rows.size());
  out.split.reserve(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    const size_t r = rows[i];
    std::copy(dataset.features.row(r), dataset.features.row(r) + dataset.features.cols,
              out.features.row(i));
    out.labels.push_back(dataset.labels[r]);
    out.group_keys.push_back(dataset.group_keys[r]);
    out.split.push_back(dataset.split[r]);
  }
  return out;
}

ProbeResult evaluate_pair_probe(const ProbeDataset& tone_dataset, int tone_a,
                                int tone_b, const ProbeOptions& opts) {
  if (tone_a == tone_b) {
    throw Error(strf("a tonal pair needs two distinct tones, got T%d twice", tone_a));
  }
  for (int tone : {tone_a, tone_b}) {
    if (std::find(tone_dataset.labels.begin(), tone_dataset.labels.end(), tone) ==
        tone_dataset.labels.end()) {
      throw Error(strf("tone %d is absent from the dataset; cannot form the pair task",
                       tone));
    }
  }
  ProbeDataset pair =
      filter_dataset(tone_dataset, {tone_a, tone_b}, tone_pair_task(tone_a, tone_b));
  return train_ridge_probe(pair, opts);
}

const std::vector<ConsonantGroup>& consonant_groups() {
  static const std::vector<ConsonantGroup> kGroups = {
      {1, {"sh", "x"}},
      {2, {"ch", "zh", "q"}},
      {3, {"s", "z", "c"}},
  };
  return kGroups;
}

int onset_label(const std::string& onset) {
  auto initials = corpus::mandarin_initials();
  if (onset.empty()) return static_cast<int>(initials.size());
  for (size_t i = 0; i < initials.size(); ++i) {
    if (initials[i] == onset) return static_cast<int>(i);
  }
  throw Error("unknown Mandarin onset: " + onset);
}

std::string onset_name(int label) {
  auto initials = corpus::mandarin_initials();
  if (label == static_cast<int>(initials.size())) return std::string();
  if (label < 0 || label > static_cast<int>(initials.size())) {
    throw Error(strf("onset label %d outside the initials table", label));
  }
  return std::string(initials[static_cast<size_t>(label)]);
}

ProbeResult evaluate_consonant_group(const ProbeDataset& consonant_dataset,
                                     int group_id, const ProbeOptions& opts) {
  const ConsonantGroup* group = nullptr;
  for (const ConsonantGroup& g : consonant_groups()) {
    if (g.id == group_id) group = &g;
  }
  if (group == nullptr) {
    throw Error(strf("unknown consonant group %d; known groups are 1..%zu", group_id,
                     consonant_groups().size()));
  }
  std::vector<int> keep;
  for (const std::string& onset : group->onsets) {
    const int label = onset_label(onset);
    if (std::find(consonant_dataset.labels.begin(), consonant_dataset.labels.end(),
                  label) == consonant_dataset.labels.end()) {
      throw Error("onset '" + onset + "' is entirely absent from the consonant dataset");
    }
    keep.push_back(label);
  }
  ProbeDataset restricted =
      filter_dataset(consonant_dataset, keep, consonant_group_task(group_id));
  return train_ridge_probe(restricted, opts);
}

}  // namespace toneprobe::probe
