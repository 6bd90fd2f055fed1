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
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "toneprobe/common/error.h"
#include "toneprobe/common/rng.h"
#include "toneprobe/common/strings.h"

using namespace toneprobe::probe;  // NOLINT
using toneprobe::Error;
using toneprobe::Rng;
using toneprobe::strings::strf;

namespace {

// Well-separated gaussian blobs: class c is centered at separation * e_c.
// Rows are bundled into class-pure groups; every fifth group of a class goes
// to the test side, so the split is exclusive by construction and every
// class lives on both sides.
ProbeDataset blob_dataset(int n_classes, int per_class, size_t dim, double separation,
                          uint64_t seed, const std::vector<int>* custom_labels = nullptr) {
  const int groups_per_class = 10;
  ProbeDataset ds;
  ds.task = tone_task();
  ds.features.resize(static_cast<size_t>(n_classes) * static_cast<size_t>(per_class), dim);
  Rng rng(seed);
  size_t row = 0;
  for (int c = 0; c < n_classes; ++c) {
    for (int i = 0; i < per_class; ++i, ++row) {
      for (size_t d = 0; d < dim; ++d) {
        double v = rng.gaussian();
        if (d == static_cast<size_t>(c) % dim) v += separation;
        ds.features.at(row, d) = static_cast<float>(v);
      }
      const int group = i % groups_per_class;
      ds.labels.push_back(custom_labels ? (*custom_labels)[row] : c + 1);
      ds.group_keys.push_back(strf("c%d_g%02d", c, group));
      ds.split.push_back(group == 0 || group == 5 ? Side::kTest : Side::kTrain);
    }
  }
  return ds;
}

}  // namespace

TEST_CASE("well-separated blobs reach test accuracy 1.0") {
  ProbeDataset ds = blob_dataset(2, 100, 5, 8.0, 1);
  ProbeResult result = train_ridge_probe(ds);
  CHECK(result.accuracy == 1.0);
  CHECK(result.train_n == 160);
  CHECK(result.test_n == 40);
  CHECK(result.task.task_name() == "tone");
  CHECK(result.task.subtask_name() == "all");
  CHECK(result.realized_test_fraction == doctest::Approx(0.2));
}

TEST_CASE("separable data selects the smallest grid alpha on ties") {
  // Every alpha classifies perfectly, so CV accuracy ties across the whole
  // grid and the tie-break picks the smallest.
  ProbeDataset ds = blob_dataset(2, 100, 5, 10.0, 2);
  ProbeResult result = train_ridge_probe(ds);
  CHECK(result.selected_alpha == default_alpha_grid().front());
  CHECK(result.cv_accuracy == 1.0);
}

TEST_CASE("shuffled labels score at chance level for four classes") {
  // Labels drawn independently of the features: accuracy must sit near 1/4.
  const int n = 2000;
  std::vector<int> shuffled(n);
  Rng label_rng(99);
  for (int& l : shuffled) l = 1 + static_cast<int>(label_rng.below(4));
  ProbeDataset ds = blob_dataset(4, n / 4, 20, /*separation=*/0.0, 3, &shuffled);
  ProbeResult result = train_ridge_probe(ds);
  CHECK(result.accuracy > 0.25 - 0.03);
  CHECK(result.accuracy < 0.25 + 0.03);
}

TEST_CASE("results are reproducible for a fixed dataset, seed, and grid") {
  ProbeDataset ds = blob_dataset(3, 60, 6, 2.0, 4);
  ProbeOptions opts;
  opts.cv_seed = 17;
  ProbeResult a = train_ridge_probe(ds, opts);
  ProbeResult b = train_ridge_probe(ds, opts);
  CHECK(a.selected_alpha == b.selected_alpha);
  CHECK(a.cv_accuracy == b.cv_accuracy);
  CHECK(a.accuracy == b.accuracy);
  CHECK(a.confusion == b.confusion);
}

TEST_CASE("confusion rows sum to the per-class test counts and trace to accuracy") {
  ProbeDataset ds = blob_dataset(4, 80, 6, 1.5, 5);
  ProbeResult result = train_ridge_probe(ds);

  std::map<int, int64_t> test_counts;
  for (size_t i = 0; i < ds.labels.size(); ++i) {
    if (ds.split[i] == Side::kTest) ++test_counts[ds.labels[i]];
  }
  REQUIRE(result.class_labels.size() == 4);
  int64_t trace = 0;
  for (size_t t = 0; t < 4; ++t) {
    int64_t row_sum = 0;
    for (size_t p = 0; p < 4; ++p) row_sum += result.confusion_at(t, p);
    CHECK(row_sum == test_counts[result.class_labels[t]]);
    trace += result.confusion_at(t, t);
  }
  CHECK(result.accuracy == static_cast<double>(trace) / static_cast<double>(result.test_n));
}

TEST_CASE("scaled features with a rescaled grid give identical results") {
  ProbeDataset ds = blob_dataset(3, 60, 6, 1.0, 6);
  // A power-of-two scale keeps the float multiply exact, so the rescaled
  // problem is bit-for-bit equivalent and the results must match exactly.
  const double c = 16.0;
  ProbeDataset scaled = ds;
  for (float& v : scaled.features.data) v = static_cast<float>(v * c);

  ProbeOptions base_opts;
  ProbeOptions scaled_opts;
  for (double a : default_alpha_grid()) scaled_opts.alpha_grid.push_back(a * c * c);

  ProbeResult base = train_ridge_probe(ds, base_opts);
  ProbeResult resc = train_ridge_probe(scaled, scaled_opts);
  CHECK(base.accuracy == resc.accuracy);
  CHECK(base.confusion == resc.confusion);
  CHECK(resc.selected_alpha == doctest::Approx(base.selected_alpha * c * c));
}

TEST_CASE("leaking a group key across sides is caught by validation") {
  ProbeDataset ds = blob_dataset(2, 40, 4, 3.0, 7);
  // Move one test row's key to a train-side key.
  size_t test_row = 0;
  while (ds.split[test_row] != Side::kTest) ++test_row;
  size_t train_row = 0;
  while (ds.split[train_row] != Side::kTrain) ++train_row;
  ds.group_keys[test_row] = ds.group_keys[train_row];
  CHECK_THROWS_WITH_AS(train_ridge_probe(ds), doctest::Contains("leak"), Error);
}

TEST_CASE("datasets with broken invariants are rejected") {
  ProbeDataset ds = blob_dataset(2, 40, 4, 3.0, 8);

  ProbeDataset ragged = ds;
  ragged.labels.pop_back();
  CHECK_THROWS_AS(ragged.validate(), Error);

  ProbeDataset infinite = ds;
  infinite.features.at(3, 1) = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(infinite.validate(), Error);

  ProbeDataset one_sided = ds;
  for (size_t i = 0; i < one_sided.labels.size(); ++i) {
    // Class 2 only on the train side.
    if (one_sided.labels[i] == 2 && one_sided.split[i] == Side::kTest) {
      one_sided.labels[i] = 1;
    }
  }
  CHECK_THROWS_WITH_AS(one_sided.validate(), doctest::Contains("class 2"), Error);

  ProbeDataset empty;
  CHECK_THROWS_AS(empty.validate(), Error);
}

TEST_CASE("a class too rare for the folds is a named stratification error") {
  ProbeDataset ds = blob_dataset(2, 100, 5, 8.0, 9);
  // Relabel three train rows (one group's worth) to a third class, and three
  // test rows too so validation passes; 3 train members cannot fill 5 folds.
  int changed_train = 0, changed_test = 0;
  for (size_t i = 0; i < ds.labels.size() && (changed_train < 3 || changed_test < 3); ++i) {
    if (ds.group_keys[i] == "c0_g01" && changed_train < 3) {
      ds.labels[i] = 9;
      ++changed_train;
    } else if (ds.group_keys[i] == "c0_g00" && changed_test < 3) {
      ds.labels[i] = 9;
      ++changed_test;
    }
  }
  REQUIRE(changed_train == 3);
  REQUIRE(changed_test == 3);
  CHECK_THROWS_WITH_AS(train_ridge_probe(ds), doctest::Contains("class 9"), Error);
}

TEST_CASE("pair probes reject equal tones and missing tones") {
  ProbeDataset ds = blob_dataset(4, 60, 6, 6.0, 10);
  CHECK_THROWS_WITH_AS(evaluate_pair_probe(ds, 2, 2), doctest::Contains("distinct"), Error);
  CHECK_THROWS_WITH_AS(evaluate_pair_probe(ds, 1, 7), doctest::Contains("7"), Error);
}

TEST_CASE("pair probes on separable blobs are perfect and well-labeled") {
  ProbeDataset ds = blob_dataset(4, 60, 6, 6.0, 11);
  ProbeResult result = evaluate_pair_probe(ds, 3, 1);
  CHECK(result.accuracy == 1.0);
  CHECK(result.task.kind == TaskKind::kTonePair);
  CHECK(result.task.task_name() == "tone_pair");
  CHECK(result.task.subtask_name() == "T1_T3");  // pairs are order-normalized
  CHECK(result.class_labels == std::vector<int>{1, 3});
  CHECK(result.train_n + result.test_n == 120);
}

TEST_CASE("consonant groups map to the published onset sets") {
  REQUIRE(consonant_groups().size() == 3);
  CHECK(consonant_groups()[0].onsets == std::vector<std::string>{"sh", "x"});
  CHECK(consonant_groups()[1].onsets == std::vector<std::string>{"ch", "zh", "q"});
  CHECK(consonant_groups()[2].onsets == std::vector<std::string>{"s", "z", "c"});
  for (const ConsonantGroup& g : consonant_groups()) {
    for (const std::string& onset : g.onsets) {
      CHECK(onset_name(onset_label(onset)) == onset);
    }
  }
  CHECK(onset_name(onset_label("")) == "");  // zero onset has its own label
  CHECK_THROWS_AS(onset_label("th"), Error);
}

TEST_CASE("consonant-group evaluation filters to the group's onsets") {
  // Build a dataset over five onsets; group 2 must keep only ch/zh/q.
  const std::vector<std::string> onsets = {"ch", "zh", "q", "sh", "s"};
  const int per_onset = 50;
  ProbeDataset ds;
  ds.task = consonant_group_task(0);
  ds.features.resize(onsets.size() * per_onset, 6);
  Rng rng(12);
  size_t row = 0;
  for (size_t o = 0; o < onsets.size(); ++o) {
    for (int i = 0; i < per_onset; ++i, ++row) {
      for (size_t d = 0; d < 6; ++d) {
        double v = rng.gaussian();
        if (d == o) v += 7.0;
        ds.features.at(row, d) = static_cast<float>(v);
      }
      ds.labels.push_back(onset_label(onsets[o]));
      const int group = i % 10;
      ds.group_keys.push_back(strf("rime_%zu_%02d", o, group));
      ds.split.push_back(group == 0 || group == 5 ? Side::kTest : Side::kTrain);
    }
  }

  ProbeResult result = evaluate_consonant_group(ds, 2);
  CHECK(result.class_labels.size() == 3);
  CHECK(result.train_n + result.test_n == 150);
  CHECK(result.accuracy == 1.0);
  CHECK(result.task.task_name() == "consonant");
  CHECK(result.task.subtask_name() == "group2");

  // Group 1 needs "x" rows, which this dataset lacks entirely.
  CHECK_THROWS_WITH_AS(evaluate_consonant_group(ds, 1), doctest::Contains("'x'"), Error);
  CHECK_THROWS_WITH_AS(evaluate_consonant_group(ds, 4), doctest::Contains("group"), Error);
}

TEST_CASE("a group onset missing from the dataset is a named error") {
  ProbeDataset ds;
  ds.task = consonant_group_task(0);
  ds.features.resize(100, 4);
  Rng rng(13);
  for (float& v : ds.features.data) v = static_cast<float>(rng.gaussian());
  for (size_t i = 0; i < 100; ++i) {
    ds.labels.push_back(onset_label(i % 2 == 0 ? "s" : "z"));  // no "c" rows
    ds.group_keys.push_back(strf("rime%02zu", i % 20));
    ds.split.push_back(i % 20 < 4 ? Side::kTest : Side::kTrain);
  }
  CHECK_THROWS_WITH_AS(evaluate_consonant_group(ds, 3), doctest::Contains("'c'"), Error);
}
