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

#include "toneprobe/features/frames.h"

#include <algorithm>
#include <cmath>

namespace toneprobe::features {

int encoder_num_frames(int64_t num_samples) {
  static constexpr int kKernels[] = {10, 3, 3, 3, 3, 2, 2};
  static constexpr int kStrides[] = {5, 2, 2, 2, 2, 2, 2};
  int64_t n = num_samples;
  for (int i = 0; i < 7; ++i) {
    if (n < kKernels[i]) return 0;
    n = (n - kKernels[i]) / kStrides[i] + 1;
  }
  return static_cast<int>(n);
}

FrameRange time_to_frames(double start_s, double end_s, int total_frames, double stride_s) {
  // The epsilon absorbs decimal timestamps that are exact frame multiples
  // but land a hair off after the division (0.1/0.02 -> 4.999...).
  constexpr double kEps = 1e-9;
  int first = static_cast<int>(std::floor(start_s / stride_s + kEps));
  int last = static_cast<int>(std::ceil(end_s / stride_s - kEps));  // exclusive

  FrameRange range;
  range.begin = std::max(first, 0);
  range.end = std::min(last, total_frames);
  if (range.empty()) {
    // Sub-frame span or span beyond the utterance: nearest valid frame.
    int anchor = std::clamp(first, 0, total_frames - 1);
    range.begin = anchor;
    range.end = anchor + 1;
  }
  return range;
}

}  // namespace toneprobe::features
