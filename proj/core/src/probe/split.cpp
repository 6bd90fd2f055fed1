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

#include "toneprobe/probe/split.h"

#include <cmath>
#include <fstream>
#include <set>

#include "json.hpp"
#include "toneprobe/common/error.h"
#include "toneprobe/common/rng.h"
#include "toneprobe/common/strings.h"

namespace toneprobe::probe {

using nlohmann::json;
using strings::strf;

namespace {

constexpr int kSplitFormatVersion = 1;

}  // namespace

std::string exclusion_key_name(ExclusionKey key) {
  switch (key) {
    case ExclusionKey::kPhonemeString:
      return "phoneme_string";
    case ExclusionKey::kRime:
      return "rime";
  }
  throw Error("unhandled exclusion key");
}

ExclusionKey parse_exclusion_key(const std::string& name) {
  if (name == "phoneme_string") return ExclusionKey::kPhonemeString;
  if (name == "rime") return ExclusionKey::kRime;
  throw Error("unknown exclusion key: " + name);
}

std::string side_name(Side side) {
  return side == Side::kTrain ? "train" : "test";
}

Side parse_side(const std::string& name) {
  if (name == "train") return Side::kTrain;
  if (name == "test") return Side::kTest;
  throw Error("unknown split side: " + name);
}

GroupAssignment make_exclusive_split(const std::vector<SplitItem>& items,
                                     const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw Error(strf("test fraction must lie in (0, 1), got %g", spec.test_fraction));
  }
  if (items.empty()) throw Error("cannot split an empty item list");

  // Group sizes, in deterministic (sorted) key order before shuffling.
  std::map<std::string, int64_t> group_sizes;
  for (const SplitItem& item : items) {
    if (item.group_key.empty()) throw Error("split item has an empty group key");
    ++group_sizes[item.group_key];
  }

  const int64_t n = static_cast<int64_t>(items.size());
  const double train_capacity = (1.0 - spec.test_fraction) * static_cast<double>(n);
  for (const auto& [key, size] : group_sizes) {
    if (static_cast<double>(size) > train_capacity) {
      throw Error(strf(
          "group '%s' holds %lld of %lld items, more than the train side can "
          "take at test fraction %g; an exclusive split at this ratio is "
          "impossible",
          key.c_str(), static_cast<long long>(size), static_cast<long long>(n),
          spec.test_fraction));
    }
  }

  std::vector<std::string> order;
  order.reserve(group_sizes.size());
  for (const auto& [key, size] : group_sizes) order.push_back(key);
  Rng rng(spec.seed);
  rng.shuffle(order);

  GroupAssignment assignment;
  const double test_target = spec.test_fraction * static_cast<double>(n);
  int64_t test_count = 0;
  for (const std::string& key : order) {
    if (static_cast<double>(test_count) >= test_target) {
      assignment[key] = Side::kTrain;
    } else {
      assignment[key] = Side::kTest;
      test_count += group_sizes[key];
    }
  }

  // Every class must be learnable and measurable: present on both sides.
  std::set<int> all_labels, train_labels, test_labels;
  for (const SplitItem& item : items) {
    all_labels.insert(item.label);
    if (assignment.at(item.group_key) == Side::kTrain) {
      train_labels.insert(item.label);
    } else {
      test_labels.insert(item.label);
    }
  }
  for (int label : all_labels) {
    if (!train_labels.count(label)) {
      throw Error(strf("class %d is absent from the train side of the exclusive "
                       "split (seed %llu); choose another seed or merge groups",
                       label, static_cast<unsigned long long>(spec.seed)));
    }
    if (!test_labels.count(label)) {
      throw Error(strf("class %d is absent from the test side of the exclusive "
                       "split (seed %llu); choose another seed or merge groups",
                       label, static_cast<unsigned long long>(spec.seed)));
    }
  }
  return assignment;
}

std::vector<Side> assign_sides(const std::vector<SplitItem>& items,
                               const GroupAssignment& assignment) {
  std::vector<Side> sides;
  sides.reserve(items.size());
  for (const SplitItem& item : items) {
    auto it = assignment.find(item.group_key);
    if (it == assignment.end()) {
      throw Error("group key '" + item.group_key +
                  "' is not covered by the persisted split; re-draw the split "
                  "for this population");
    }
    sides.push_back(it->second);
  }
  return sides;
}

double realized_test_fraction(const std::vector<Side>& sides) {
  if (sides.empty()) return 0.0;
  int64_t test = 0;
  for (Side s : sides) {
    if (s == Side::kTest) ++test;
  }
  return static_cast<double>(test) / static_cast<double>(sides.size());
}

void write_split_json(const std::filesystem::path& path, const SplitFile& split) {
  json groups = json::object();
  for (const auto& [key, side] : split.groups) groups[key] = side_name(side);
  json doc = {
      {"format_version", kSplitFormatVersion},
      {"exclusion_key", exclusion_key_name(split.spec.exclusion_key)},
      {"test_fraction", split.spec.test_fraction},
      {"seed", split.spec.seed},
      {"groups", std::move(groups)},
  };
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write split file: " + path.string());
  out << doc.dump(2) << "\n";
  if (!out) throw Error("short write on split file: " + path.string());
}

SplitFile read_split_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read split file: " + path.string());
  json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw Error("split file is not valid JSON: " + path.string());
  if (!doc.contains("format_version") ||
      doc["format_version"].get<int>() != kSplitFormatVersion) {
    throw Error("split file has an unsupported format version: " + path.string());
  }
  SplitFile split;
  split.spec.exclusion_key = parse_exclusion_key(doc.at("exclusion_key").get<std::string>());
  split.spec.test_fraction = doc.at("test_fraction").get<double>();
  split.spec.seed = doc.at("seed").get<uint64_t>();
  for (const auto& [key, value] : doc.at("groups").items()) {
    split.groups[key] = parse_side(value.get<std::string>());
  }
  return split;
}

}  // namespace toneprobe::probe
