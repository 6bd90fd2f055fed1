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

#include <filesystem>
#include <set>
#include <string>

#include "doctest.h"
#include "toneprobe/common/error.h"
#include "toneprobe/common/rng.h"
#include "toneprobe/common/strings.h"

namespace fs = std::filesystem;
using namespace toneprobe::probe;  // NOLINT
using toneprobe::Error;
using toneprobe::Rng;
using toneprobe::strings::strf;

namespace {

// items_per_group identical-size groups; labels alternate within each group
// so both classes exist everywhere.
std::vector<SplitItem> equal_groups(int n_groups, int items_per_group) {
  std::vector<SplitItem> items;
  for (int g = 0; g < n_groups; ++g) {
    for (int i = 0; i < items_per_group; ++i) {
      items.push_back({strf("group%03d", g), i % 2});
    }
  }
  return items;
}

}  // namespace

TEST_CASE("ten equal groups at fraction 0.2 put exactly two groups in test") {
  std::vector<SplitItem> items = equal_groups(10, 8);
  for (uint64_t seed : {0ULL, 1ULL, 7ULL, 12345ULL}) {
    SplitSpec spec;
    spec.seed = seed;
    GroupAssignment assignment = make_exclusive_split(items, spec);
    int test_groups = 0;
    for (const auto& [key, side] : assignment) {
      if (side == Side::kTest) ++test_groups;
    }
    CHECK(test_groups == 2);
    std::vector<Side> sides = assign_sides(items, assignment);
    CHECK(realized_test_fraction(sides) == doctest::Approx(0.2));
  }
}

TEST_CASE("group keys never appear on both sides across 1000 randomized splits") {
  // Random group structures and seeds; exclusivity must hold in all of them.
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n_groups = 5 + static_cast<int>(rng.below(40));
    std::vector<SplitItem> items;
    for (int g = 0; g < n_groups; ++g) {
      const int size = 1 + static_cast<int>(rng.below(6));
      for (int i = 0; i < size; ++i) {
        items.push_back({strf("k%04d", g), i % 2});
      }
    }
    SplitSpec spec;
    spec.seed = rng.next_u64();
    GroupAssignment assignment;
    try {
      assignment = make_exclusive_split(items, spec);
    } catch (const Error&) {
      continue;  // tiny populations may legitimately fail the class check
    }
    std::vector<Side> sides = assign_sides(items, assignment);
    std::set<std::string> train_keys, test_keys;
    for (size_t i = 0; i < items.size(); ++i) {
      (sides[i] == Side::kTrain ? train_keys : test_keys).insert(items[i].group_key);
    }
    for (const std::string& key : test_keys) {
      REQUIRE(train_keys.count(key) == 0);
    }
  }
}

TEST_CASE("a group larger than the train capacity is rejected") {
  std::vector<SplitItem> items;
  for (int i = 0; i < 90; ++i) items.push_back({"huge", i % 2});
  for (int g = 0; g < 10; ++g) items.push_back({strf("small%d", g), g % 2});
  SplitSpec spec;  // capacity = 0.8 * 100 = 80 < 90
  CHECK_THROWS_WITH_AS(make_exclusive_split(items, spec),
                       doctest::Contains("huge"), Error);
}

TEST_CASE("a class absent from one side is an error naming the class") {
  // Class 7 lives in a single group; whichever side that group lands on,
  // the other side lacks the class.
  std::vector<SplitItem> items = equal_groups(10, 8);
  for (auto& item : items) {
    if (item.group_key == "group004") item.label = 7;
  }
  bool threw = false;
  for (uint64_t seed = 0; seed < 4; ++seed) {
    SplitSpec spec;
    spec.seed = seed;
    try {
      make_exclusive_split(items, spec);
    } catch (const Error& e) {
      threw = true;
      CHECK(std::string(e.what()).find("class 7") != std::string::npos);
    }
  }
  CHECK(threw);
}

TEST_CASE("the realized fraction tracks the request on fine-grained groups") {
  Rng rng(99);
  std::vector<SplitItem> items;
  for (int g = 0; g < 400; ++g) {
    const int size = 1 + static_cast<int>(rng.below(4));
    for (int i = 0; i < size; ++i) items.push_back({strf("g%05d", g), i % 2});
  }
  SplitSpec spec;
  spec.seed = 5;
  std::vector<Side> sides = assign_sides(items, make_exclusive_split(items, spec));
  const double realized = realized_test_fraction(sides);
  CHECK(realized >= 0.20);         // fill stops at first reach, so never below
  CHECK(realized <= 0.20 + 0.02);  // and granular groups overshoot only slightly
}

TEST_CASE("splits are deterministic in the seed") {
  std::vector<SplitItem> items = equal_groups(30, 4);
  SplitSpec spec;
  spec.seed = 11;
  GroupAssignment a = make_exclusive_split(items, spec);
  GroupAssignment b = make_exclusive_split(items, spec);
  CHECK(a == b);

  spec.seed = 12;
  GroupAssignment c = make_exclusive_split(items, spec);
  CHECK(a != c);  // 30 choose 6 arrangements; a collision would be a bug
}

TEST_CASE("invalid requests are rejected") {
  std::vector<SplitItem> items = equal_groups(10, 2);
  SplitSpec spec;
  spec.test_fraction = 0.0;
  CHECK_THROWS_AS(make_exclusive_split(items, spec), Error);
  spec.test_fraction = 1.0;
  CHECK_THROWS_AS(make_exclusive_split(items, spec), Error);
  spec.test_fraction = 0.2;
  CHECK_THROWS_AS(make_exclusive_split({}, spec), Error);
  CHECK_THROWS_AS(make_exclusive_split({{"", 0}, {"a", 1}}, spec), Error);
}

TEST_CASE("assigning an uncovered key is an error") {
  GroupAssignment assignment{{"known", Side::kTrain}};
  std::vector<SplitItem> items{{"known", 0}, {"unknown", 1}};
  CHECK_THROWS_WITH_AS(assign_sides(items, assignment),
                       doctest::Contains("unknown"), Error);
}

TEST_CASE("split files round-trip through JSON") {
  std::vector<SplitItem> items = equal_groups(12, 5);
  SplitFile split;
  split.spec.exclusion_key = ExclusionKey::kRime;
  split.spec.test_fraction = 0.25;
  split.spec.seed = 77;
  split.groups = make_exclusive_split(items, split.spec);

  fs::path path = fs::temp_directory_path() / "toneprobe_split_test" / "tone_s77.json";
  fs::remove_all(path.parent_path());
  write_split_json(path, split);
  SplitFile loaded = read_split_json(path);

  CHECK(loaded.spec.exclusion_key == ExclusionKey::kRime);
  CHECK(loaded.spec.test_fraction == doctest::Approx(0.25));
  CHECK(loaded.spec.seed == 77);
  CHECK(loaded.groups == split.groups);

  CHECK_THROWS_AS(read_split_json(path.parent_path() / "missing.json"), Error);
}

TEST_CASE("side and key names round-trip") {
  CHECK(parse_side(side_name(Side::kTrain)) == Side::kTrain);
  CHECK(parse_side(side_name(Side::kTest)) == Side::kTest);
  CHECK(parse_exclusion_key(exclusion_key_name(ExclusionKey::kPhonemeString)) ==
        ExclusionKey::kPhonemeString);
  CHECK(parse_exclusion_key(exclusion_key_name(ExclusionKey::kRime)) == ExclusionKey::kRime);
  CHECK_THROWS_AS(parse_side("sideways"), Error);
  CHECK_THROWS_AS(parse_exclusion_key("syllable"), Error);
}
