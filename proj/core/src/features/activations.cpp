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

#include "toneprobe/features/activations.h"

#include "toneprobe/common/error.h"
#include "toneprobe/common/strings.h"

namespace toneprobe::features {

std::string checkpoint_name(int64_t checkpoint_step) {
  if (checkpoint_step == kFinalCheckpoint) return "final";
  return strings::strf("step_%06lld", static_cast<long long>(checkpoint_step));
}

void LayerActivations::validate() const {
  if (layers.empty()) {
    throw Error("activations for " + utterance_id + " have no layers");
  }
  for (size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].rows != layers[0].rows || layers[l].cols != layers[0].cols) {
      throw Error(strings::strf(
          "activations for %s: layer %zu is %zux%zu, layer 0 is %zux%zu",
          utterance_id.c_str(), l, layers[l].rows, layers[l].cols, layers[0].rows,
          layers[0].cols));
    }
  }
}

}  // namespace toneprobe::features
