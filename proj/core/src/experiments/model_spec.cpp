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

#include "toneprobe/experiments/model_spec.h"

#include <algorithm>

#include "toneprobe/common/error.h"
#include "toneprobe/common/strings.h"

namespace toneprobe::experiments {

using strings::strf;

std::string_view tonality_name(Tonality tonality) {
  switch (tonality) {
    case Tonality::kTonal: return "tonal";
    case Tonality::kNonTonal: return "non_tonal";
  }
  throw Error("unreachable: unknown tonality enumerator");
}

Tonality parse_tonality(std::string_view name) {
  if (name == "tonal") return Tonality::kTonal;
  if (name == "non_tonal") return Tonality::kNonTonal;
  throw Error(strf("unknown tonality '%.*s' (expected tonal or non_tonal)",
                   static_cast<int>(name.size()), name.data()));
}

std::string_view training_stage_name(TrainingStage stage) {
  switch (stage) {
    case TrainingStage::kPretrained: return "pretrained";
    case TrainingStage::kFinetuned: return "finetuned";
  }
  throw Error("unreachable: unknown training stage enumerator");
}

TrainingStage parse_training_stage(std::string_view name) {
  if (name == "pretrained") return TrainingStage::kPretrained;
  if (name == "finetuned") return TrainingStage::kFinetuned;
  throw Error(strf("unknown training stage '%.*s' (expected pretrained or finetuned)",
                   static_cast<int>(name.size()), name.data()));
}

std::optional<Tonality> tonality_for_language(Language language) {
  switch (language) {
    case Language::kMandarin:
    case Language::kVietnamese:
    case Language::kCantonese:
      return Tonality::kTonal;
    case Language::kEnglish:
    case Language::kFrench:
      return Tonality::kNonTonal;
    case Language::kOther:
      return std::nullopt;
  }
  throw Error("unreachable: unknown language enumerator");
}

std::vector<std::string> model_spec_problems(const ModelSpec& spec) {
  std::vector<std::string> problems;
  if (spec.model_id.empty()) {
    problems.push_back("model_id is empty");
  } else if (spec.model_id.find_first_of(",\"\r\n") != std::string::npos) {
    problems.push_back(strf("model_id '%s' contains a comma, quote or newline",
                            spec.model_id.c_str()));
  }
  if (spec.encoder.empty()) {
    problems.push_back(strf("model '%s' has no encoder locator", spec.model_id.c_str()));
  }
  if (auto required = tonality_for_language(spec.language);
      required.has_value() && *required != spec.tonality) {
    problems.push_back(strf(
        "model '%s': language %.*s is %.*s but the spec declares %.*s",
        spec.model_id.c_str(), static_cast<int>(language_name(spec.language).size()),
        language_name(spec.language).data(),
        static_cast<int>(tonality_name(*required).size()), tonality_name(*required).data(),
        static_cast<int>(tonality_name(spec.tonality).size()),
        tonality_name(spec.tonality).data()));
  }
  if (!(spec.stride_s > 0.0)) {
    problems.push_back(strf("model '%s': frame stride must be positive, got %g",
                            spec.model_id.c_str(), spec.stride_s));
  }
  if (spec.n_layers < 1) {
    problems.push_back(strf("model '%s': layer count must be at least 1, got %d",
                            spec.model_id.c_str(), spec.n_layers));
  }
  if (spec.dim == 0) {
    problems.push_back(strf("model '%s': feature dimension must be positive",
                            spec.model_id.c_str()));
  }
  for (int64_t step : spec.checkpoint_steps) {
    if (step < 0) {
      problems.push_back(strf("model '%s': checkpoint step %lld is negative",
                              spec.model_id.c_str(), static_cast<long long>(step)));
      break;
    }
  }
  if (std::adjacent_find(spec.checkpoint_steps.begin(), spec.checkpoint_steps.end(),
                         [](int64_t a, int64_t b) { return a >= b; }) !=
      spec.checkpoint_steps.end()) {
    problems.push_back(strf("model '%s': checkpoint steps must be strictly increasing",
                            spec.model_id.c_str()));
  }
  return problems;
}

void validate_model_spec(const ModelSpec& spec) {
  const std::vector<std::string> problems = model_spec_problems(spec);
  if (problems.empty()) return;
  std::string joined = "invalid model spec:";
  for (const std::string& p : problems) {
    joined += "\n  - ";
    joined += p;
  }
  throw Error(joined);
}

}  // namespace toneprobe::experiments
