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

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "toneprobe/corpus/pinyin.h"

namespace {

const std::vector<std::string>& sample_tokens() {
  static const std::vector<std::string> tokens = {
      "zhong1", "guo2", "ren2",  "min2", "hen3", "hao3",  "jin1", "tian1",
      "tian1",  "qi4",  "shuo1", "hua4", "lv4",  "xing2", "a1",   "er2",
  };
  return tokens;
}

void BM_ParsePinyin(benchmark::State& state) {
  const auto& tokens = sample_tokens();
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(toneprobe::corpus::parse_pinyin(tokens[i % tokens.size()]));
    ++i;
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()));
}
BENCHMARK(BM_ParsePinyin);

}  // namespace
