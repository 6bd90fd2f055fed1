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

#ifndef TONEPROBE_FEATURES_POOLING_H_
#define TONEPROBE_FEATURES_POOLING_H_

#include <vector>

#include "toneprobe/common/matrix.h"
#include "toneprobe/corpus/types.h"
#include "toneprobe/features/activations.h"
#include "toneprobe/features/frames.h"

namespace toneprobe::features {

// Arithmetic mean over rows [range.begin, range.end) of a frames x dim
// matrix. The range must be non-empty and within the matrix.
std::vector<float> pool_span(const MatrixF& frames, FrameRange range);

// Average-pools the frames under one syllable's span, one vector per layer.
std::vector<std::vector<float>> pool_syllable(const LayerActivations& acts,
                                              const corpus::AlignedSyllable& syllable);

}  // namespace toneprobe::features

#endif  // TONEPROBE_FEATURES_POOLING_H_
