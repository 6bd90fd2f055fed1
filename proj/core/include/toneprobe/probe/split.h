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

#ifndef TONEPROBE_PROBE_SPLIT_H_
#define TONEPROBE_PROBE_SPLIT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace toneprobe::probe {

// Which syllable property defines the leakage-exclusion groups: the full
// phoneme string for tone tasks, the rime (nucleus + coda) for consonant
// tasks. Items sharing a group key always land on the same side.
enum class ExclusionKey { kPhonemeString, kRime };

std::string exclusion_key_name(ExclusionKey key);
ExclusionKey parse_exclusion_key(const std::string& name);

enum class Side : uint8_t { kTrain = 0, kTest = 1 };

std::string side_name(Side side);
Side parse_side(const std::string& name);

struct SplitSpec {
  ExclusionKey exclusion_key = ExclusionKey::kPhonemeString;
  double test_fraction = 0.20;
  uint64_t seed = 0;
};

// One row of the population to split: its exclusion-group key plus its class
// label, which is only consulted to verify that no class ends up absent from
// either side.
struct SplitItem {
  std::string group_key;
  int label = 0;
};

// The persisted form of a split: every group key mapped to a side. Ordered so
// the JSON serialization is canonical.
using GroupAssignment = std::map<std::string, Side>;

// Assigns whole groups at random (seeded) to the test side until the test
// item count first reaches test_fraction * N; every remaining group goes to
// train. Exclusivity holds by construction: a key appears on exactly one
// side. Throws toneprobe::Error when a single group alone exceeds
// (1 - test_fraction) * N (the ratio is unreachable) or when some class is
// absent from one side (the error names the class and the side).
GroupAssignment make_exclusive_split(const std::vector<SplitItem>& items,
                                     const SplitSpec& spec);

// Side per item under an assignment. Throws when an item's key is not in the
// assignment (the persisted split does not cover this population).
std::vector<Side> assign_sides(const std::vector<SplitItem>& items,
                               const GroupAssignment& assignment);

// Fraction of items on the test side; the realized ratio is reported next to
// the requested one because group-granular assignment overshoots slightly.
double realized_test_fraction(const std::vector<Side>& sides);

// Persisted split file: the spec it was drawn under plus the assignment, so
// every experiment on the same (corpus, task, seed) reuses the identical
// split.
struct SplitFile {
  SplitSpec spec;
  GroupAssignment groups;
};

void write_split_json(const std::filesystem::path& path, const SplitFile& split);
SplitFile read_split_json(const std::filesystem::path& path);

}  // namespace toneprobe::probe

#endif  // TONEPROBE_PROBE_SPLIT_H_
