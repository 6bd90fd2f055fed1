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

#ifndef TONEPROBE_FEATURES_ACTIVATIONS_H_
#define TONEPROBE_FEATURES_ACTIVATIONS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "toneprobe/common/matrix.h"
#include "toneprobe/features/frames.h"

namespace toneprobe::features {

// Checkpoint sentinel for a fully trained model ("final" in reports).
inline constexpr int64_t kFinalCheckpoint = -1;

std::string checkpoint_name(int64_t checkpoint_step);  // "final" or "step_000500"

// All hidden states of one utterance: layer 0 is the convolutional
// feature-encoder output, layers 1..n the transformer blocks.
struct LayerActivations {
  std::string model_id;
  int64_t checkpoint_step = kFinalCheckpoint;
  std::string utterance_id;
  std::vector<MatrixF> layers;  // each frames x dim
  double frame_stride_s = kFrameStrideS;
  double frame_receptive_s = kFrameReceptiveS;

  int num_layers() const { return static_cast<int>(layers.size()); }
  int num_frames() const { return layers.empty() ? 0 : static_cast<int>(layers[0].rows); }
  int dim() const { return layers.empty() ? 0 : static_cast<int>(layers[0].cols); }

  // Throws Error unless every layer shares one frame count and one dim.
  void validate() const;
};

}  // namespace toneprobe::features

#endif  // TONEPROBE_FEATURES_ACTIVATIONS_H_
